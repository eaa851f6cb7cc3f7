#include "catgeo/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "catgeo/io.hpp"

namespace catgeo::model {
namespace {

Dense zero_dense(std::size_t in, std::size_t out) {
    return Dense{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
}

void fill_gaussian(Dense& d, Rng& rng) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(d.in_dim()));
    for (Eigen::Index i = 0; i < d.weight.rows(); ++i)
        for (Eigen::Index j = 0; j < d.weight.cols(); ++j) d.weight(i, j) = rng.normal(0.0, sd);
}

template <typename M>
std::span<double> view(M& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
}
template <typename M>
std::span<const double> cview(const M& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

PointNetLite::PointNetLite(const std::vector<std::size_t>& widths, std::size_t num_classes) {
    if (widths.size() < 2) throw std::invalid_argument("PointNetLite: need at least input and feature widths");
    for (auto w : widths)
        if (w == 0) throw std::invalid_argument("PointNetLite: zero layer width");
    if (num_classes == 0) throw std::invalid_argument("PointNetLite: zero classes");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) layers_.push_back(zero_dense(widths[l], widths[l + 1]));
    head_ = zero_dense(widths.back(), num_classes);
}

PointNetLite PointNetLite::random(const std::vector<std::size_t>& widths, std::size_t num_classes, Rng& rng) {
    PointNetLite net(widths, num_classes);
    for (auto& layer : net.layers_) fill_gaussian(layer, rng);
    fill_gaussian(net.head_, rng);
    return net;
}

std::vector<std::size_t> PointNetLite::widths() const {
    std::vector<std::size_t> w{input_dim()};
    for (const auto& layer : layers_) w.push_back(layer.out_dim());
    return w;
}

std::vector<std::span<double>> PointNetLite::parameters() {
    std::vector<std::span<double>> out;
    for (auto& layer : layers_) {
        out.push_back(view(layer.weight));
        out.push_back(view(layer.bias));
    }
    out.push_back(view(head_.weight));
    out.push_back(view(head_.bias));
    return out;
}

std::vector<std::span<const double>> PointNetLite::parameters() const {
    std::vector<std::span<const double>> out;
    for (const auto& layer : layers_) {
        out.push_back(cview(layer.weight));
        out.push_back(cview(layer.bias));
    }
    out.push_back(cview(head_.weight));
    out.push_back(cview(head_.bias));
    return out;
}

Eigen::MatrixXd encode_inputs(const PointCloud& cloud) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(cloud.size()), 4);
    for (std::size_t n = 0; n < cloud.size(); ++n) {
        const auto& p = cloud.points[n];
        const auto i = static_cast<Eigen::Index>(n);
        x(i, 0) = p.x / kSceneScale;
        x(i, 1) = p.y / kSceneScale;
        x(i, 2) = p.z / kSceneScale;
        x(i, 3) = p.intensity;
    }
    return x;
}

std::vector<std::uint32_t> ForwardPass::predictions() const {
    std::vector<std::uint32_t> out(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        Eigen::Index arg = 0;
        logits.row(n).maxCoeff(&arg);
        out[static_cast<std::size_t>(n)] = static_cast<std::uint32_t>(arg);
    }
    return out;
}

ForwardPass forward(const PointNetLite& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
    if (static_cast<std::size_t>(inputs.cols()) != model.input_dim())
        throw DimensionError("forward: input width " + std::to_string(inputs.cols()) + ", model expects " +
                             std::to_string(model.input_dim()));
    ForwardPass out;
    out.input = inputs;
    const Eigen::MatrixXd* prev = &out.input;
    out.activations.reserve(model.layers().size());
    for (const auto& layer : model.layers()) {
        Eigen::MatrixXd h;
        h.noalias() = *prev * layer.weight.transpose();
        h.rowwise() += layer.bias.transpose();
        h = h.array().tanh();
        out.activations.push_back(std::move(h));
        prev = &out.activations.back();
    }
    out.logits.noalias() = out.features() * model.head().weight.transpose();
    out.logits.rowwise() += model.head().bias.transpose();
    return out;
}

ForwardPass forward(const PointNetLite& model, const PointCloud& cloud) {
    return forward(model, encode_inputs(cloud));
}

Gradients Gradients::zeros_like(const PointNetLite& model, const cge::RelationMatrix& Q) {
    Gradients g;
    for (const auto& layer : model.layers()) g.layers.push_back(zero_dense(layer.in_dim(), layer.out_dim()));
    g.head = zero_dense(model.head().in_dim(), model.head().out_dim());
    g.relation = Eigen::MatrixXd::Zero(Q.values.rows(), Q.values.cols());
    return g;
}

std::vector<std::span<double>> Gradients::views() {
    std::vector<std::span<double>> out;
    for (auto& layer : layers) {
        out.push_back(view(layer.weight));
        out.push_back(view(layer.bias));
    }
    out.push_back(view(head.weight));
    out.push_back(view(head.bias));
    out.push_back(view(relation));
    return out;
}

std::vector<std::span<const double>> Gradients::views() const {
    std::vector<std::span<const double>> out;
    for (const auto& layer : layers) {
        out.push_back(cview(layer.weight));
        out.push_back(cview(layer.bias));
    }
    out.push_back(cview(head.weight));
    out.push_back(cview(head.bias));
    out.push_back(cview(relation));
    return out;
}

std::vector<std::span<double>> trainable(PointNetLite& model, cge::RelationMatrix& Q) {
    auto out = model.parameters();
    out.push_back(view(Q.values));
    return out;
}

GradientTape::GradientTape(const PointNetLite& model, const cge::RelationMatrix& Q)
    : model_(model), relation_(Q), grad_relation_(Eigen::MatrixXd::Zero(Q.values.rows(), Q.values.cols())) {}

std::size_t GradientTape::record(const PointCloud& cloud) {
    passes_.push_back(Entry{forward(model_, cloud), {}, {}});
    ++generation_;
    return passes_.size() - 1;
}

CrossEntropy GradientTape::add_seg_loss(std::size_t id, const LabelSet& labels, double weight) {
    auto& entry = passes_.at(id);
    auto ce = seg_loss(entry.fwd.logits, labels);
    ++generation_;
    if (ce.empty() || weight == 0.0) return ce;
    if (entry.grad_logits.size() == 0) entry.grad_logits = Eigen::MatrixXd::Zero(ce.grad_logits.rows(), ce.grad_logits.cols());
    entry.grad_logits += weight * ce.grad_logits;
    total_ += weight * ce.value;
    return ce;
}

cge::GeometryLoss GradientTape::add_geometry_loss(std::size_t id, const cge::EmbeddingMatrix& A,
                                                  const LabelSet& labels, double weight) {
    auto& entry = passes_.at(id);
    auto loss = cge::geometry_loss(entry.fwd.features(), A, relation_, labels);
    ++generation_;
    if (loss.empty() || weight == 0.0) return loss;
    const auto& F = entry.fwd.features();
    if (entry.grad_features.size() == 0) entry.grad_features = Eigen::MatrixXd::Zero(F.rows(), F.cols());
    entry.grad_features += weight * loss.grad_features;
    grad_relation_ += weight * loss.grad_relation;
    total_ += weight * loss.value;
    return loss;
}

Gradients GradientTape::backward(const TotalLoss& total) const {
    if (total.tape != this || total.generation != generation_)
        throw std::logic_error("backward: loss total does not belong to this tape state");
    Gradients g = Gradients::zeros_like(model_, relation_);
    g.relation = grad_relation_;
    const auto& layers = model_.layers();
    for (const auto& entry : passes_) {
        if (entry.grad_logits.size() == 0 && entry.grad_features.size() == 0) continue;
        const auto& F = entry.fwd.features();
        Eigen::MatrixXd upstream = entry.grad_features.size() ? entry.grad_features
                                                              : Eigen::MatrixXd::Zero(F.rows(), F.cols());
        if (entry.grad_logits.size()) {
            g.head.weight.noalias() += entry.grad_logits.transpose() * F;
            g.head.bias += entry.grad_logits.colwise().sum().transpose();
            upstream.noalias() += entry.grad_logits * model_.head().weight;
        }
        for (std::size_t l = layers.size(); l-- > 0;) {
            const auto& h = entry.fwd.activations[l];
            const Eigen::MatrixXd& below = l == 0 ? entry.fwd.input : entry.fwd.activations[l - 1];
            const Eigen::MatrixXd pre = upstream.array() * (1.0 - h.array().square());
            g.layers[l].weight.noalias() += pre.transpose() * below;
            g.layers[l].bias += pre.colwise().sum().transpose();
            if (l > 0) upstream.noalias() = pre * layers[l].weight;
        }
    }
    return g;
}

bool sgd_step(SgdState& state, std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads) {
    if (params.size() != grads.size()) throw DimensionError("sgd_step: parameter/gradient count mismatch");
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].size() != grads[t].size())
            throw DimensionError("sgd_step: shape mismatch in tensor " + std::to_string(t));
        for (double g : grads[t])
            if (!std::isfinite(g)) return false;
    }
    if (state.velocity.size() != params.size()) {
        state.velocity.assign(params.size(), {});
        for (std::size_t t = 0; t < params.size(); ++t) state.velocity[t].assign(params[t].size(), 0.0);
    }
    for (std::size_t t = 0; t < params.size(); ++t) {
        auto& v = state.velocity[t];
        if (v.size() != params[t].size()) throw DimensionError("sgd_step: velocity shape mismatch");
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = state.momentum * v[i] + grads[t][i] + state.weight_decay * params[t][i];
            params[t][i] -= state.lr * v[i];
        }
    }
    return true;
}

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { bytes_.push_back(static_cast<std::byte>(v)); }
    void u32(std::uint32_t v) {
        for (int s = 0; s < 32; s += 8) u8(static_cast<std::uint8_t>((v >> s) & 0xFFu));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int s = 0; s < 64; s += 8) u8(static_cast<std::uint8_t>((bits >> s) & 0xFFu));
    }
    void matrix(const Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
    std::vector<std::byte> take() { return std::move(bytes_); }

private:
    std::vector<std::byte> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int s = 0; s < 32; s += 8) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << s;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int s = 0; s < 64; s += 8) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << s;
        return std::bit_cast<double>(v);
    }
    template <typename M>
    void matrix(M&& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
    }
    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size())
            throw io::FormatError("checkpoint truncated at byte " + std::to_string(pos_), pos_, pos_);
    }
    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> encode_checkpoint(const Checkpoint& ckpt) {
    const auto& net = ckpt.model;
    const auto& A = ckpt.embedding;
    if (A.feature_dim() != net.feature_dim() || A.num_classes() != net.num_classes())
        throw DimensionError("checkpoint: embedding shape does not match the network");
    if (static_cast<std::size_t>(ckpt.relation.values.rows()) != A.num_classes() * A.num_props() ||
        static_cast<std::size_t>(ckpt.relation.values.cols()) != A.num_classes())
        throw DimensionError("checkpoint: relation matrix shape does not match the embedding");
    Writer w;
    for (char ch : std::string_view("GSEG")) w.u8(static_cast<std::uint8_t>(ch));
    w.u8(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(net.input_dim()));
    w.u32(static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& layer : net.layers()) w.u32(static_cast<std::uint32_t>(layer.out_dim()));
    w.u32(static_cast<std::uint32_t>(net.feature_dim()));
    w.u32(static_cast<std::uint32_t>(net.num_classes()));
    w.u32(static_cast<std::uint32_t>(A.num_props()));
    for (const auto& layer : net.layers()) {
        w.matrix(layer.weight);
        w.matrix(layer.bias);
    }
    w.matrix(net.head().weight);
    w.matrix(net.head().bias);
    w.matrix(ckpt.relation.values);
    for (std::size_t c = 0; c < A.num_classes(); ++c) w.matrix(Eigen::MatrixXd(A.block(c)));
    return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::byte> bytes) {
    Reader r(bytes);
    for (char ch : std::string_view("GSEG"))
        if (r.u8() != static_cast<std::uint8_t>(ch)) throw io::FormatError("checkpoint: bad magic", 0, 0);
    const auto version = r.u8();
    if (version != kCheckpointVersion)
        throw io::FormatError("checkpoint: unsupported version " + std::to_string(version), 4, 0);
    std::vector<std::size_t> widths{r.u32()};
    const auto num_layers = r.u32();
    if (num_layers == 0 || num_layers > 64) throw io::FormatError("checkpoint: bad layer count", r.pos(), 0);
    for (std::uint32_t l = 0; l < num_layers; ++l) widths.push_back(r.u32());
    const std::size_t D = r.u32(), C = r.u32(), M = r.u32();
    if (D != widths.back()) throw DimensionError("checkpoint: feature width disagrees with last layer");
    if (C == 0 || M == 0) throw DimensionError("checkpoint: zero class or property count");
    Checkpoint ckpt{PointNetLite(widths, C), {}, cge::EmbeddingMatrix(D, C, M)};
    for (auto& layer : ckpt.model.layers()) {
        r.matrix(layer.weight);
        r.matrix(layer.bias);
    }
    r.matrix(ckpt.model.head().weight);
    r.matrix(ckpt.model.head().bias);
    ckpt.relation.values.resize(static_cast<Eigen::Index>(C * M), static_cast<Eigen::Index>(C));
    r.matrix(ckpt.relation.values);
    for (std::size_t c = 0; c < C; ++c) r.matrix(ckpt.embedding.block(c));
    if (!r.done()) throw io::FormatError("checkpoint: trailing bytes at " + std::to_string(r.pos()), r.pos(), 0);
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const auto bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io::IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io::IoError("write failed on '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io::IoError("cannot open checkpoint '" + path.string() + "'");
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> bytes(raw.size());
    std::memcpy(bytes.data(), raw.data(), raw.size());
    return decode_checkpoint(bytes);
}

}  // namespace catgeo::model
