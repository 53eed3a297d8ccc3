#pragma once

#include "eef/approx.hpp"
#include "eef/channel.hpp"
#include "eef/common.hpp"
#include "eef/conic.hpp"
#include "eef/harness.hpp"
#include "eef/ia.hpp"
#include "eef/model.hpp"
#include "eef/params.hpp"
#include "eef/zf.hpp"
