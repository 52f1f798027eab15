#pragma once

#include "arisppo/actor_critic.hpp"
#include "arisppo/baselines.hpp"
#include "arisppo/channel.hpp"
#include "arisppo/checkpoint.hpp"
#include "arisppo/env.hpp"
#include "arisppo/errors.hpp"
#include "arisppo/experiment.hpp"
#include "arisppo/moppo.hpp"
#include "arisppo/neural.hpp"
#include "arisppo/phy.hpp"
#include "arisppo/rng.hpp"
#include "arisppo/scenario.hpp"
