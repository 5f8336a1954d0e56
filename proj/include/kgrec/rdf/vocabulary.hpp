#pragma once

#include <string>
#include <string_view>

namespace kgrec::rdf::vocab {

inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kCrm = "http://www.cidoc-crm.org/cidoc-crm/";

inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";

inline std::string crm(std::string_view local) { return std::string(kCrm) + std::string(local); }
inline std::string xsd(std::string_view local) { return std::string(kXsd) + std::string(local); }

/// Expands `crm:`, `rdf:`, `rdfs:`, `xsd:` prefixes and strips `<...>`.
/// Anything else is returned unchanged.
std::string expand_curie(std::string_view name);

/// Inverse of expand_curie for the known prefixes; `<iri>` otherwise.
std::string compact_iri(std::string_view iri);

}  // namespace kgrec::rdf::vocab
