#pragma once

#include "crimefis/anfis.hpp"
#include "crimefis/commands.hpp"
#include "crimefis/config.hpp"
#include "crimefis/dataset.hpp"
#include "crimefis/error.hpp"
#include "crimefis/experts.hpp"
#include "crimefis/fuzzy.hpp"
#include "crimefis/grid.hpp"
#include "crimefis/serialization.hpp"
