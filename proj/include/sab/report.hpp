#pragma once

#include <iosfwd>

#include <json.hpp>

#include "sab/algorithms.hpp"
#include "sab/montecarlo.hpp"
#include "sab/oracle.hpp"
#include "sab/weights.hpp"

namespace sab {

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const GroundTruth& truth);
nlohmann::json to_json(const EigenPair& pair);
nlohmann::json to_json(const ScheduleReport& report);
nlohmann::json to_json(const ReplicationRecord& record);
/// Everything except the raw normality samples.
nlohmann::json to_json(const EnsembleSummary& summary);

/// Header "k,algorithm,metric,mean,stderr"; one row per checkpoint,
/// algorithm and metric.
void write_curves_csv(const EnsembleSummary& summary, std::ostream& os);

/// Header "method,<k1>,<k2>,..."; rows PI (tracked agent) and PIave
/// (across-agent average) with coverage percentages.
void write_coverage_table_csv(const EnsembleSummary& summary, std::ostream& os);

/// Header "k,series,replication,component,value" with value
/// sqrt(k)(average - x*) for series "agent" and "average".
void write_normality_csv(const EnsembleSummary& summary, std::ostream& os);

}  // namespace sab
