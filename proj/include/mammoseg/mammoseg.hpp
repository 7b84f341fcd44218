#pragma once

#include "mammoseg/classification.hpp"
#include "mammoseg/components.hpp"
#include "mammoseg/distance.hpp"
#include "mammoseg/error.hpp"
#include "mammoseg/histogram.hpp"
#include "mammoseg/measurement.hpp"
#include "mammoseg/median.hpp"
#include "mammoseg/morphology.hpp"
#include "mammoseg/pgm.hpp"
#include "mammoseg/phantom.hpp"
#include "mammoseg/pipeline.hpp"
#include "mammoseg/raster.hpp"
#include "mammoseg/report.hpp"
#include "mammoseg/watershed.hpp"
