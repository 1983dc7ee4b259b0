#pragma once

#include "fibid/closure.hpp"
#include "fibid/corpus.hpp"
#include "fibid/discovery.hpp"
#include "fibid/errors.hpp"
#include "fibid/expr.hpp"
#include "fibid/linalg.hpp"
#include "fibid/parser.hpp"
#include "fibid/prover.hpp"
#include "fibid/serialize.hpp"
#include "fibid/trigraph.hpp"
