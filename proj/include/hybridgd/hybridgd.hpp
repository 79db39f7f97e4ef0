#pragma once

#include <hybridgd/agents.hpp>
#include <hybridgd/analysis.hpp>
#include <hybridgd/certificate.hpp>
#include <hybridgd/errors.hpp>
#include <hybridgd/experiment.hpp>
#include <hybridgd/hybrid.hpp>
#include <hybridgd/objective.hpp>
