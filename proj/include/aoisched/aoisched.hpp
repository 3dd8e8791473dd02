#pragma once

#include "aoisched/analytics.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/io.hpp"
#include "aoisched/matrix.hpp"
#include "aoisched/model.hpp"
#include "aoisched/online.hpp"
#include "aoisched/optimizer.hpp"
#include "aoisched/rng.hpp"
#include "aoisched/simulator.hpp"
#include "aoisched/tradeoff_example.hpp"
