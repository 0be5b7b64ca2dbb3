#pragma once

#include "analysis.hpp"
#include "bicubic.hpp"
#include "error.hpp"
#include "icegraph.hpp"
#include "image.hpp"
#include "image_io.hpp"
#include "layout.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "sensing.hpp"
#include "solvers.hpp"
#include "spl.hpp"
#include "transform.hpp"
