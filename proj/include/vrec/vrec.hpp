#pragma once

#include "vrec/checkpoint.hpp"
#include "vrec/common.hpp"
#include "vrec/data.hpp"
#include "vrec/demand.hpp"
#include "vrec/evaluation.hpp"
#include "vrec/features.hpp"
#include "vrec/gradcheck.hpp"
#include "vrec/kmeans.hpp"
#include "vrec/math.hpp"
#include "vrec/pipeline.hpp"
#include "vrec/preference.hpp"
#include "vrec/ranker.hpp"
#include "vrec/synthgen.hpp"
