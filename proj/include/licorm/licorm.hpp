#ifndef LICORM_LICORM_HPP
#define LICORM_LICORM_HPP

#include "licorm/dualsolver.hpp"
#include "licorm/error.hpp"
#include "licorm/measures.hpp"
#include "licorm/numeric.hpp"
#include "licorm/random.hpp"
#include "licorm/riskmeasures.hpp"
#include "licorm/transport.hpp"
#include "licorm/verify.hpp"

#endif // LICORM_LICORM_HPP
