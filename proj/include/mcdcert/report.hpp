#pragma once

// Structured (JSON) form of estimates, bounds, certification and validation
// results. Floating point numbers are written with 17 significant digits so
// every value reparses to the identical double.

#include "mcdcert/bounds.hpp"
#include "mcdcert/certify.hpp"
#include "mcdcert/diameter.hpp"
#include "mcdcert/montecarlo.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace mcdcert {

using Json = nlohmann::ordered_json;

Json domain_to_json(const BoxDomain& d);
BoxDomain domain_from_json(const Json& j);

Json to_json(const DiameterEstimate& e);
Json to_json(const BoundsSummary& s);
Json to_json(const CertificationReport& r);
Json to_json(const ValidationResult& v);
Json to_json(const UsefulnessAdvice& a);

DiameterEstimate estimate_from_json(const Json& j);
BoundsSummary bounds_from_json(const Json& j);
CertificationReport certification_from_json(const Json& j);
ValidationResult validation_from_json(const Json& j);

/// Pretty-printed JSON with 17-significant-digit floats and a trailing newline.
std::string dump_structured(const Json& j);

/// Parses a report and checks the invariants of every section it contains.
/// Throws InvalidArgument describing the first violation.
void revalidate_report(const Json& report);

}  // namespace mcdcert
