// Umbrella header.

#ifndef TDV_TDV_HPP
#define TDV_TDV_HPP

#include "tdv/anisotropy.hpp"
#include "tdv/apps.hpp"
#include "tdv/diffops.hpp"
#include "tdv/fields.hpp"
#include "tdv/metrics.hpp"
#include "tdv/pdhg.hpp"
#include "tdv/rng.hpp"
#include "tdv/synth.hpp"
#include "tdv/tdvop.hpp"
#include "tdv/wavelet.hpp"

#endif  // TDV_TDV_HPP
