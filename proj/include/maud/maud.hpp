#pragma once

#include "maud/assessment.hpp"
#include "maud/beta.hpp"
#include "maud/error.hpp"
#include "maud/evaluation.hpp"
#include "maud/expected_utility.hpp"
#include "maud/knowledge_base.hpp"
#include "maud/numeric.hpp"
#include "maud/report.hpp"
#include "maud/rule_engine.hpp"
#include "maud/script.hpp"
#include "maud/serialization.hpp"
#include "maud/utility.hpp"
