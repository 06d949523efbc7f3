// SPDX-License-Identifier: Apache-2.0
// Cluster separation measures for trained spaces on planted syngen data.
#pragma once

#include "reccheck/embedding.hpp"
#include "reccheck/syngen.hpp"

#include <map>

namespace testsupport {

struct ClusterGeometry {
    double intra = 0.0; // mean cosine similarity within a cluster
    double inter = 0.0; // mean cosine similarity across clusters
    double top1_same = 0.0; // fraction of tokens whose nearest neighbour shares the cluster
    double margin() const { return intra - inter; }
};

inline ClusterGeometry cluster_geometry(const reccheck::EmbeddingSpace& space,
                                        const std::map<reccheck::ItemId, reccheck::PlantedItem>& manifest) {
    using namespace reccheck;
    const auto& tokens = space.tokens();
    double intra = 0, inter = 0;
    std::size_t n_intra = 0, n_inter = 0, same = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto ci = manifest.at(tokens[i]).cluster;
        for (std::size_t j = i + 1; j < tokens.size(); ++j) {
            const double sim = 1.0 - cosine_distance(space.vector(i), space.vector(j));
            if (manifest.at(tokens[j]).cluster == ci) {
                intra += sim;
                ++n_intra;
            } else {
                inter += sim;
                ++n_inter;
            }
        }
        const auto nn = nearest_neighbors(space, tokens[i], 1);
        if (!nn.empty() && manifest.at(nn[0].token).cluster == ci) ++same;
    }
    ClusterGeometry g;
    g.intra = intra / static_cast<double>(n_intra);
    g.inter = inter / static_cast<double>(n_inter);
    g.top1_same = static_cast<double>(same) / static_cast<double>(tokens.size());
    return g;
}

inline std::vector<reccheck::TokenSequence> syn_sequences(const reccheck::SynData& data) {
    return reccheck::item_sequences(reccheck::sessionize(data.interactions));
}

} // namespace testsupport
