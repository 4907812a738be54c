#pragma once

#include "hfp/alias.hpp"
#include "hfp/config.hpp"
#include "hfp/error.hpp"
#include "hfp/experiments.hpp"
#include "hfp/io.hpp"
#include "hfp/linalg.hpp"
#include "hfp/pipeline.hpp"
#include "hfp/prony.hpp"
#include "hfp/selftest.hpp"
#include "hfp/signal_lab.hpp"
#include "hfp/spectral.hpp"
