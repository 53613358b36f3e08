#pragma once

#include <map>
#include <string>

namespace hgcr {

/// Opaque concept identifier (e.g. a CUI such as "C0001234"). Compared by
/// exact string equality.
using ConceptId = std::string;

/// Opaque document identifier (e.g. a PMID).
using DocId = std::string;

/// Maps surface strings found in text to concept identifiers.
using Lexicon = std::map<std::string, ConceptId>;

}  // namespace hgcr
