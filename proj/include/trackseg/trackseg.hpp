#pragma once

#include "trackseg/error.hpp"
#include "trackseg/grid.hpp"
#include "trackseg/geometry.hpp"
#include "trackseg/raster.hpp"
#include "trackseg/tracker.hpp"
#include "trackseg/hysteresis.hpp"
#include "trackseg/pipeline.hpp"
#include "trackseg/evalkit.hpp"
#include "trackseg/synth.hpp"
#include "trackseg/oracle.hpp"
#include "trackseg/ingest.hpp"
