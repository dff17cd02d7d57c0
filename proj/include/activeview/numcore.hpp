#ifndef ACTIVEVIEW_NUMCORE_HPP_
#define ACTIVEVIEW_NUMCORE_HPP_

#include "activeview/numcore/functional.hpp"
#include "activeview/numcore/grad_check.hpp"
#include "activeview/numcore/optim.hpp"
#include "activeview/numcore/tape.hpp"
#include "activeview/numcore/types.hpp"

#endif  // ACTIVEVIEW_NUMCORE_HPP_
