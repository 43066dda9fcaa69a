#pragma once

#include "sweepdepth/augment.hpp"
#include "sweepdepth/core.hpp"
#include "sweepdepth/cost_volume.hpp"
#include "sweepdepth/eval.hpp"
#include "sweepdepth/features.hpp"
#include "sweepdepth/geometry.hpp"
#include "sweepdepth/io.hpp"
#include "sweepdepth/losses.hpp"
#include "sweepdepth/parallel.hpp"
#include "sweepdepth/pipeline.hpp"
#include "sweepdepth/scenes.hpp"
#include "sweepdepth/synth.hpp"
