#pragma once

#include "ecp/checkpoint.hpp"
#include "ecp/conformal.hpp"
#include "ecp/csv_table.hpp"
#include "ecp/error.hpp"
#include "ecp/evaluation.hpp"
#include "ecp/evalue.hpp"
#include "ecp/file_io.hpp"
#include "ecp/lambda_search.hpp"
#include "ecp/parallel.hpp"
#include "ecp/policy.hpp"
#include "ecp/report.hpp"
#include "ecp/scores.hpp"
#include "ecp/scores_csv.hpp"
#include "ecp/trainer.hpp"
