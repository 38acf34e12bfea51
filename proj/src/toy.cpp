#include "ampl/toy.hpp"

namespace ampl::toy {

SecretSpace make_space() {
    LabeledVectors vecs;
    vecs.labels = {"x1", "x2"};
    vecs.vectors = {{0.0}, {1.0}};  // d(x1, x2) = 1
    return build_space(vecs, {}, {}, 1.0);  // uniform prior (0.5, 0.5)
}

Channel make_channel(const SecretSpace& space) {
    Channel ch;
    ch.inputs = {0, 1};
    ch.outputs.labels = {"y1", "y2"};
    ch.outputs.vectors = {{0.0}, {1.0}};
    ch.matrix = {{0.72, 0.28}, {0.28, 0.72}};
    return ch;
}

JointModel make_joint() {
    std::map<std::vector<int>, double> table{
        {{0, 0}, 0.01}, {{0, 1}, 0.49}, {{1, 0}, 0.49}, {{1, 1}, 0.01}};
    return build_joint(2, table, 2);
}

}  // namespace ampl::toy
