#pragma once

#include "centerline.hpp"
#include "config.hpp"
#include "decode.hpp"
#include "errors.hpp"
#include "heatmap.hpp"
#include "labels.hpp"
#include "metrics.hpp"
#include "optimize.hpp"
#include "pipeline.hpp"
#include "plot.hpp"
#include "rectify.hpp"
#include "synth.hpp"
#include "vec3.hpp"
#include "volume.hpp"
#include "volume_io.hpp"
