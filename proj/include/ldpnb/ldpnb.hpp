#pragma once

#include "ldpnb/continuous.hpp"
#include "ldpnb/data.hpp"
#include "ldpnb/dimred.hpp"
#include "ldpnb/encoding.hpp"
#include "ldpnb/errors.hpp"
#include "ldpnb/experiment.hpp"
#include "ldpnb/freq.hpp"
#include "ldpnb/linalg.hpp"
#include "ldpnb/model.hpp"
#include "ldpnb/pipeline.hpp"
#include "ldpnb/random.hpp"
#include "ldpnb/serialize.hpp"
