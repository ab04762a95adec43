#pragma once

#include "rkit/augmented.hpp"
#include "rkit/bits.hpp"
#include "rkit/container.hpp"
#include "rkit/errors.hpp"
#include "rkit/field.hpp"
#include "rkit/filter.hpp"
#include "rkit/hashing.hpp"
#include "rkit/linalg.hpp"
#include "rkit/oracle.hpp"
#include "rkit/retrieval.hpp"
#include "rkit/rowgen.hpp"
#include "rkit/split.hpp"
#include "rkit/succinct.hpp"
#include "rkit/validation.hpp"
