#pragma once

#include "intact/data.hpp"
#include "intact/error.hpp"
#include "intact/eval.hpp"
#include "intact/gradcheck.hpp"
#include "intact/gradients.hpp"
#include "intact/inference.hpp"
#include "intact/losses.hpp"
#include "intact/model.hpp"
#include "intact/trainer.hpp"
