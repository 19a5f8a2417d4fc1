#pragma once

// Umbrella header for the whole library.

#include "spikevis/analysis.hpp"
#include "spikevis/classify.hpp"
#include "spikevis/config.hpp"
#include "spikevis/encoder.hpp"
#include "spikevis/error.hpp"
#include "spikevis/features.hpp"
#include "spikevis/gabor.hpp"
#include "spikevis/image.hpp"
#include "spikevis/image_io.hpp"
#include "spikevis/learning.hpp"
#include "spikevis/manifest.hpp"
#include "spikevis/network.hpp"
#include "spikevis/persist.hpp"
#include "spikevis/rng.hpp"
#include "spikevis/spike.hpp"
#include "spikevis/synthetic.hpp"
#include "spikevis/train.hpp"
