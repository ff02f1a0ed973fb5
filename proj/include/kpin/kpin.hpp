#pragma once

#include "kpin/dynamics.hpp"
#include "kpin/ensemble.hpp"
#include "kpin/experiments.hpp"
#include "kpin/feasibility.hpp"
#include "kpin/graph.hpp"
#include "kpin/io.hpp"
#include "kpin/rng.hpp"
#include "kpin/select.hpp"
#include "kpin/spectral.hpp"
