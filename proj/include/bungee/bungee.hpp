#pragma once

#include "bungee/analysis.hpp"
#include "bungee/core_maps.hpp"
#include "bungee/dynamics.hpp"
#include "bungee/point.hpp"
#include "bungee/polygon.hpp"
#include "bungee/raster.hpp"
#include "bungee/snake.hpp"
