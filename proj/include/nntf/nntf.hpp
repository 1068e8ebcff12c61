#pragma once

#include "nntf/dense_tensor.hpp"
#include "nntf/diagnostics.hpp"
#include "nntf/divergence.hpp"
#include "nntf/io.hpp"
#include "nntf/kruskal_model.hpp"
#include "nntf/pathologies.hpp"
#include "nntf/solvers.hpp"
