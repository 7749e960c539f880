#pragma once

#include "hotspot/certificates.hpp"
#include "hotspot/config.hpp"
#include "hotspot/dynamics.hpp"
#include "hotspot/error.hpp"
#include "hotspot/functionals.hpp"
#include "hotspot/grid.hpp"
#include "hotspot/io.hpp"
#include "hotspot/material.hpp"
#include "hotspot/quadrature.hpp"
#include "hotspot/scenario.hpp"
#include "hotspot/verify.hpp"
