#pragma once

#include "bbmnet/assembly.hpp"
#include "bbmnet/elliptic.hpp"
#include "bbmnet/evolve.hpp"
#include "bbmnet/network.hpp"
#include "bbmnet/spectral.hpp"
