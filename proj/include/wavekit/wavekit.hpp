#pragma once

// Umbrella header.

#include "wavekit/align.hpp"
#include "wavekit/augment.hpp"
#include "wavekit/encoder.hpp"
#include "wavekit/errors.hpp"
#include "wavekit/evalkit.hpp"
#include "wavekit/instructkit.hpp"
#include "wavekit/preprocess.hpp"
#include "wavekit/ragstore.hpp"
#include "wavekit/rng.hpp"
#include "wavekit/signalio.hpp"
#include "wavekit/synthetic.hpp"
#include "wavekit/tensorfile.hpp"
#include "wavekit/textmetrics.hpp"
