#pragma once

// JSON mappings for the pipeline types. Doubles are written in shortest
// round-trip form, so save -> load is exact.

#include "cgrq/cgr.hpp"
#include "cgrq/data.hpp"
#include "cgrq/fusion.hpp"
#include "cgrq/medoid.hpp"
#include "cgrq/model.hpp"
#include "cgrq/optimizer.hpp"
#include "cgrq/vqc.hpp"

#include <json.hpp>

namespace cgrq {

using Json = nlohmann::json;

void to_json(Json& j, const Matrix& m);
void from_json(const Json& j, Matrix& m);

void to_json(Json& j, const Scaler& s);
void from_json(const Json& j, Scaler& s);

void to_json(Json& j, const SplitIndices& s);
void from_json(const Json& j, SplitIndices& s);

/// {num_features, anchors: [a...], membership: {"a": [...]}, weights: {"a,f": rho}}
void to_json(Json& j, const AnchorModel& m);
void from_json(const Json& j, AnchorModel& m);

void to_json(Json& j, const CgrConfig& c);
void from_json(const Json& j, CgrConfig& c);

/// Medoids keyed by class index.
void to_json(Json& j, const MedoidSet& m);
void from_json(const Json& j, MedoidSet& m);

void to_json(Json& j, const FusionParams& p);
void from_json(const Json& j, FusionParams& p);

void to_json(Json& j, const QuantumOptions& q);
void from_json(const Json& j, QuantumOptions& q);

void to_json(Json& j, const InputTransform& t);
void from_json(const Json& j, InputTransform& t);

void to_json(Json& j, const FusionModel& m);
void from_json(const Json& j, FusionModel& m);

void to_json(Json& j, const ClassMetrics& m);
void from_json(const Json& j, ClassMetrics& m);

void to_json(Json& j, const MetricsReport& r);
void from_json(const Json& j, MetricsReport& r);

void to_json(Json& j, const AlphaRecord& r);
void from_json(const Json& j, AlphaRecord& r);

void to_json(Json& j, const FbetaRow& r);

void to_json(Json& j, const KRecord& r);
void from_json(const Json& j, KRecord& r);

void to_json(Json& j, const SearchRecord& r);
void from_json(const Json& j, SearchRecord& r);

/// {n, L, reupload, mapping, m_inputs, z_max, lambda}
void to_json(Json& j, const VqcSpec& s);
void from_json(const Json& j, VqcSpec& s);

void to_json(Json& j, const SpsaConfig& c);

void to_json(Json& j, const SpsaRecord& r);

void to_json(Json& j, const HyperParams& h);
void from_json(const Json& j, HyperParams& h);

void to_json(Json& j, const HpRecord& r);

}  // namespace cgrq
