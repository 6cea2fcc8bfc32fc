#pragma once

#include "sedil/adam.hpp"
#include "sedil/adapter.hpp"
#include "sedil/checkpoint.hpp"
#include "sedil/common.hpp"
#include "sedil/datagen.hpp"
#include "sedil/experiment.hpp"
#include "sedil/io.hpp"
#include "sedil/layers.hpp"
#include "sedil/loss.hpp"
#include "sedil/metrics.hpp"
#include "sedil/model.hpp"
#include "sedil/rng.hpp"
#include "sedil/tensor.hpp"
#include "sedil/trainer.hpp"
