#pragma once

#include <iosfwd>
#include <string>

#include "loopforge/chain.hpp"

namespace loopforge {

// Graph JSON schema:
//   {"vertices":[id...], "boundary":[id...],
//    "edges":[{"from":id,"to":id,"re":f,"im":f}],
//    "symmetry":"general|symmetric|hermitian"}
// "im" may be omitted for real weights; reverse edges may be omitted when
// symmetry != general.  Schema violations raise schema_error naming the
// offending field.
WeightedChain load_chain_json(std::istream& in);
WeightedChain load_chain_file(const std::string& path);

std::string chain_to_json(const WeightedChain& chain);

} // namespace loopforge
