#pragma once

#include <string>

#include "json.hpp"

#include "bamlab/bam.hpp"
#include "bamlab/model.hpp"

namespace bamlab {

// Field order is fixed (ordered_json + sorted node maps), so serializing the
// same object twice gives byte-identical text.
using Json = nlohmann::ordered_json;

// {"stages": [{"kind": "discrete", "support": [[...], ...], "probs": [...]}
//             | {"kind": "equal_revenue", "v_max": x}, ...]}
Json instance_to_json(const Instance& inst);
Instance instance_from_json(const Json& j);  // validates before returning

// {"nodes": [{"history": [...], "alloc": [...], "pay": x}, ...]}
Json mechanism_to_json(const DirectMechanism& m);
DirectMechanism mechanism_from_json(const Json& j);

// {"promised_utility": x, "stages": [{"support": [[...], ...],
//   "rows": [{"bal": b, "s": s, "z": [[...], ...], "q": [...], "d": [...]},
//            ...]}, ...]}
Json tabular_to_json(const TabularBam& bam);
TabularBam tabular_from_json(const Json& j);

Json load_json(const std::string& path);               // throws JsonRead
void save_json(const std::string& path, const Json& j);  // throws JsonWrite
Instance load_instance(const std::string& path);

}  // namespace bamlab
