#include "loopforge/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace loopforge {

using nlohmann::json;

WeightedChain load_chain_json(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw schema_error(std::string("graph JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw schema_error("graph JSON: top level must be an object");
    if (!j.contains("vertices") || !j["vertices"].is_array())
        throw schema_error("graph JSON: missing array field 'vertices'");
    if (!j.contains("boundary") || !j["boundary"].is_array())
        throw schema_error("graph JSON: missing array field 'boundary'");
    if (!j.contains("edges") || !j["edges"].is_array())
        throw schema_error("graph JSON: missing array field 'edges'");

    Symmetry sym = Symmetry::general;
    if (j.contains("symmetry")) {
        std::string s = j["symmetry"].get<std::string>();
        if (s == "general") sym = Symmetry::general;
        else if (s == "symmetric") sym = Symmetry::symmetric;
        else if (s == "hermitian") sym = Symmetry::hermitian;
        else throw schema_error("graph JSON: field 'symmetry' must be general|symmetric|hermitian");
    }

    std::vector<VertexId> interior, boundary;
    for (const auto& v : j["vertices"]) {
        if (!v.is_number_integer()) throw schema_error("graph JSON: 'vertices' entries must be integers");
        interior.push_back(v.get<VertexId>());
    }
    for (const auto& v : j["boundary"]) {
        if (!v.is_number_integer()) throw schema_error("graph JSON: 'boundary' entries must be integers");
        boundary.push_back(v.get<VertexId>());
    }

    std::vector<EdgeWeight> edges;
    int k = 0;
    for (const auto& e : j["edges"]) {
        std::ostringstream where;
        where << "graph JSON: edges[" << k << "]";
        if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e.contains("re"))
            throw schema_error(where.str() + " needs fields from,to,re");
        if (!e["from"].is_number_integer() || !e["to"].is_number_integer())
            throw schema_error(where.str() + " from/to must be integer ids");
        if (!e["re"].is_number()) throw schema_error(where.str() + " re must be a number");
        double re = e["re"].get<double>();
        double im = 0.0;
        if (e.contains("im")) {
            if (!e["im"].is_number()) throw schema_error(where.str() + " im must be a number");
            im = e["im"].get<double>();
        }
        edges.push_back({e["from"].get<VertexId>(), e["to"].get<VertexId>(), Complex(re, im)});
        ++k;
    }
    try {
        return WeightedChain(std::move(interior), std::move(boundary), edges, sym);
    } catch (const invalid_input& e) {
        throw schema_error(std::string("graph JSON: ") + e.what());
    }
}

WeightedChain load_chain_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open graph file: " + path);
    return load_chain_json(in);
}

std::string chain_to_json(const WeightedChain& chain) {
    json j;
    j["vertices"] = json::array();
    j["boundary"] = json::array();
    for (int v = 0; v < chain.interior_size(); ++v) j["vertices"].push_back(chain.id_of(v));
    for (int v = chain.interior_size(); v < chain.total_size(); ++v)
        j["boundary"].push_back(chain.id_of(v));
    const char* sym = to_string(chain.symmetry());
    j["symmetry"] = sym;
    j["edges"] = json::array();
    for (int u = 0; u < chain.total_size(); ++u) {
        for (int v : chain.out_neighbors()[static_cast<std::size_t>(u)]) {
            Complex w = chain.weight(u, v);
            json e;
            e["from"] = chain.id_of(u);
            e["to"] = chain.id_of(v);
            e["re"] = w.real();
            if (w.imag() != 0.0) e["im"] = w.imag();
            j["edges"].push_back(e);
        }
    }
    return j.dump(2);
}

} // namespace loopforge
