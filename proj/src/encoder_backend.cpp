#include "agenda/encoder_backend.hpp"

#include "agenda/error.hpp"
#include "agenda/metrics.hpp"
#include "agenda/random.hpp"
#include "agenda/training.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

namespace agenda {

namespace {

constexpr char kWeightsMagic[8] = {'A', 'G', 'E', 'N', 'C', 'W', '0', '1'};
constexpr char kHeadMagic[8] = {'A', 'G', 'E', 'N', 'C', 'H', '0', '1'};
constexpr double kLayerNormEps = 1e-12;

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) throw ValidationError("truncated encoder file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f32(std::ostream& out, double d) {
    const auto f = static_cast<float>(d);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 4);
}

double read_f32(std::istream& in) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) throw ValidationError("truncated encoder weights");
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return static_cast<double>(f);
}

void write_f64(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    write_u64(out, bits);
}

double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

template <typename M>
void write_tensor(std::ostream& out, const M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_f32(out, m(r, c));
    }
}

template <typename M>
void read_tensor(std::istream& in, M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f32(in);
    }
}

// Visits every tensor in file order.
template <typename W, typename F>
void for_each_tensor(W& w, F&& f) {
    f(w.word_embeddings);
    f(w.position_embeddings);
    f(w.token_type_embedding);
    f(w.embedding_ln_gamma);
    f(w.embedding_ln_beta);
    for (auto& l : w.layers) {
        f(l.wq), f(l.bq), f(l.wk), f(l.bk), f(l.wv), f(l.bv), f(l.wo), f(l.bo);
        f(l.ln1_gamma), f(l.ln1_beta);
        f(l.w1), f(l.b1), f(l.w2), f(l.b2);
        f(l.ln2_gamma), f(l.ln2_beta);
    }
}

void allocate(EncoderWeights& w) {
    const auto& c = w.config;
    const auto H = static_cast<Eigen::Index>(c.hidden);
    const auto I = static_cast<Eigen::Index>(c.intermediate);
    w.word_embeddings.resize(static_cast<Eigen::Index>(c.vocab_size), H);
    w.position_embeddings.resize(static_cast<Eigen::Index>(c.max_positions), H);
    w.token_type_embedding.resize(H);
    w.embedding_ln_gamma.resize(H);
    w.embedding_ln_beta.resize(H);
    w.layers.resize(c.layers);
    for (auto& l : w.layers) {
        l.wq.resize(H, H), l.wk.resize(H, H), l.wv.resize(H, H), l.wo.resize(H, H);
        l.bq.resize(H), l.bk.resize(H), l.bv.resize(H), l.bo.resize(H);
        l.ln1_gamma.resize(H), l.ln1_beta.resize(H), l.ln2_gamma.resize(H), l.ln2_beta.resize(H);
        l.w1.resize(H, I), l.b1.resize(I), l.w2.resize(I, H), l.b2.resize(H);
    }
}

void check_config(const EncoderConfig& c) {
    if (c.vocab_size < 4 || c.hidden == 0 || c.layers == 0 || c.heads == 0 || c.intermediate == 0 ||
        c.max_positions < 3 || c.hidden % c.heads != 0) {
        throw ValidationError("invalid encoder configuration");
    }
    if (c.vocab_size > 1000000 || c.hidden > 4096 || c.layers > 64 || c.max_positions > 65536) {
        throw ValidationError("encoder configuration exceeds supported sizes");
    }
}

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& gamma, const Eigen::RowVectorXd& beta) {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        out.row(r) = ((x.row(r).array() - mean) / std::sqrt(var + kLayerNormEps)).matrix();
        out.row(r) = out.row(r).cwiseProduct(gamma) + beta;
    }
    return out;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

// ---------------------------------------------------------------------------
// Weights

EncoderWeights EncoderWeights::random(const EncoderConfig& config, std::uint64_t seed, double init_std) {
    check_config(config);
    EncoderWeights w;
    w.config = config;
    allocate(w);
    Rng rng(seed);
    for_each_tensor(w, [&](auto& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = init_std * rng.normal();
        }
    });
    // Layer-norm gains start at one and shifts at zero, as in BERT.
    w.embedding_ln_gamma.setOnes();
    w.embedding_ln_beta.setZero();
    for (auto& l : w.layers) {
        l.ln1_gamma.setOnes(), l.ln2_gamma.setOnes();
        l.ln1_beta.setZero(), l.ln2_beta.setZero();
    }
    // Round-trip through float so saved and in-memory weights agree exactly.
    for_each_tensor(w, [](auto& m) { m = m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); }); });
    return w;
}

EncoderWeights EncoderWeights::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open encoder weights " + path.string());
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kWeightsMagic, 8) != 0) {
        throw ValidationError(path.string() + ": not an encoder weights file");
    }
    EncoderWeights w;
    w.config.vocab_size = read_u64(in);
    w.config.hidden = read_u64(in);
    w.config.layers = read_u64(in);
    w.config.heads = read_u64(in);
    w.config.intermediate = read_u64(in);
    w.config.max_positions = read_u64(in);
    w.config.lowercase = read_u64(in) != 0;
    check_config(w.config);
    allocate(w);
    for_each_tensor(w, [&](auto& m) { read_tensor(in, m); });
    return w;
}

void EncoderWeights::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(kWeightsMagic, 8);
    write_u64(out, config.vocab_size);
    write_u64(out, config.hidden);
    write_u64(out, config.layers);
    write_u64(out, config.heads);
    write_u64(out, config.intermediate);
    write_u64(out, config.max_positions);
    write_u64(out, config.lowercase ? 1 : 0);
    for_each_tensor(*this, [&](const auto& m) { write_tensor(out, m); });
}

std::string EncoderWeights::fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    for_each_tensor(*this, [&](const auto& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                const auto f = static_cast<float>(m(r, c));
                unsigned char bytes[4];
                std::memcpy(bytes, &f, 4);
                for (unsigned char b : bytes) {
                    h ^= b;
                    h *= 1099511628211ULL;
                }
            }
        }
    });
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Tokenizer

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> vocab, bool lowercase)
    : vocab_(std::move(vocab)), lowercase_(lowercase) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) ids_.emplace(vocab_[i], static_cast<int>(i));
    auto special = [&](const char* name) {
        auto it = ids_.find(name);
        if (it == ids_.end()) throw ValidationError(std::string("vocabulary lacks ") + name);
        return it->second;
    };
    cls_ = special("[CLS]");
    sep_ = special("[SEP]");
    unk_ = special("[UNK]");
}

WordPieceTokenizer WordPieceTokenizer::load(const std::filesystem::path& vocab_file, bool lowercase) {
    std::ifstream in(vocab_file);
    if (!in) throw NotFoundError("cannot open vocabulary " + vocab_file.string());
    std::vector<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        vocab.push_back(line);
    }
    return WordPieceTokenizer(std::move(vocab), lowercase);
}

std::vector<Token> WordPieceTokenizer::basic_tokens(std::string_view text) const {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
        } else if (is_punct(c)) {
            out.push_back({std::string(1, text[i]), i, i + 1});
            ++i;
        } else {
            const std::size_t start = i;
            while (i < text.size()) {
                const auto d = static_cast<unsigned char>(text[i]);
                if (std::isspace(d) || is_punct(d)) break;
                ++i;
            }
            out.push_back({std::string(text.substr(start, i - start)), start, i});
        }
    }
    return out;
}

std::vector<std::string> WordPieceTokenizer::pieces(std::string_view word) const {
    const std::string w = lowercase_ ? to_lower(word) : std::string(word);
    if (w.size() > 100) return {"[UNK]"};
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < w.size()) {
        std::size_t end = w.size();
        std::string found;
        while (end > start) {
            std::string candidate = (start > 0 ? "##" : "") + w.substr(start, end - start);
            if (ids_.count(candidate)) {
                found = std::move(candidate);
                break;
            }
            --end;
        }
        if (found.empty()) return {"[UNK]"};
        out.push_back(std::move(found));
        start = end;
    }
    return out;
}

int WordPieceTokenizer::id(std::string_view piece) const {
    auto it = ids_.find(std::string(piece));
    return it == ids_.end() ? unk_ : it->second;
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(EncoderWeights weights, WordPieceTokenizer tokenizer, bool word_merged)
    : weights_(std::move(weights)), tokenizer_(std::move(tokenizer)), word_merged_(word_merged) {
    if (tokenizer_.size() != weights_.config.vocab_size) {
        throw ValidationError("vocabulary size " + std::to_string(tokenizer_.size()) +
                              " does not match encoder vocab_size " + std::to_string(weights_.config.vocab_size));
    }
    fingerprint_ = weights_.fingerprint();
}

EncoderOutput Encoder::encode(std::span<const PositionedToken> tokens) const {
    const auto& c = weights_.config;
    const std::size_t limit = c.max_positions;
    std::vector<int> ids{tokenizer_.cls_id()};
    std::vector<std::size_t> positions{0};
    EncoderOutput out;
    out.token_slots.resize(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const std::size_t pos = std::min<std::size_t>(tokens[t].position + 1, limit - 1);
        const auto pieces = word_merged_ ? tokenizer_.pieces(tokens[t].token) : std::vector<std::string>{tokens[t].token};
        for (const auto& p : pieces) {
            if (ids.size() + 1 >= limit) break;  // keep a slot for [SEP]
            out.token_slots[t].push_back(ids.size());
            ids.push_back(tokenizer_.id(p));
            positions.push_back(pos);
        }
    }
    ids.push_back(tokenizer_.sep_id());
    positions.push_back(std::min(positions.back() + 1, limit - 1));

    const auto n = static_cast<Eigen::Index>(ids.size());
    const auto H = static_cast<Eigen::Index>(c.hidden);
    Eigen::MatrixXd x(n, H);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = weights_.word_embeddings.row(ids[static_cast<std::size_t>(i)]) +
                   weights_.position_embeddings.row(static_cast<Eigen::Index>(positions[static_cast<std::size_t>(i)])) +
                   weights_.token_type_embedding;
    }
    x = layer_norm(x, weights_.embedding_ln_gamma, weights_.embedding_ln_beta);

    const auto heads = static_cast<Eigen::Index>(c.heads);
    const Eigen::Index d = H / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (const auto& layer : weights_.layers) {
        Eigen::MatrixXd q = (x * layer.wq).rowwise() + layer.bq;
        Eigen::MatrixXd k = (x * layer.wk).rowwise() + layer.bk;
        Eigen::MatrixXd v = (x * layer.wv).rowwise() + layer.bv;
        Eigen::MatrixXd context(n, H);
        std::vector<Eigen::RowVectorXd> cls_rows;
        for (Eigen::Index h = 0; h < heads; ++h) {
            Eigen::MatrixXd scores = q.middleCols(h * d, d) * k.middleCols(h * d, d).transpose() * scale;
            for (Eigen::Index r = 0; r < n; ++r) {
                const double m = scores.row(r).maxCoeff();
                scores.row(r) = (scores.row(r).array() - m).exp().matrix();
                scores.row(r) /= scores.row(r).sum();
            }
            cls_rows.push_back(scores.row(0));
            context.middleCols(h * d, d) = scores * v.middleCols(h * d, d);
        }
        out.cls_attention.push_back(std::move(cls_rows));
        Eigen::MatrixXd attn = (context * layer.wo).rowwise() + layer.bo;
        x = layer_norm(attn + x, layer.ln1_gamma, layer.ln1_beta);
        Eigen::MatrixXd inner = ((x * layer.w1).rowwise() + layer.b1).unaryExpr([](double z) { return gelu(z); });
        Eigen::MatrixXd ffn = (inner * layer.w2).rowwise() + layer.b2;
        x = layer_norm(ffn + x, layer.ln2_gamma, layer.ln2_beta);
    }
    out.cls_hidden = x.row(0);
    return out;
}

std::vector<double> Encoder::saliency(const EncoderOutput& out, std::size_t token_count) const {
    const std::size_t layer = out.cls_attention.size() >= 2 ? out.cls_attention.size() - 2 : 0;
    const auto& rows = out.cls_attention[layer];
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(rows.front().size());
    for (const auto& r : rows) mean += r;
    mean /= static_cast<double>(rows.size());
    std::vector<double> scores(token_count, 0.0);
    for (std::size_t t = 0; t < token_count && t < out.token_slots.size(); ++t) {
        for (std::size_t slot : out.token_slots[t]) {
            scores[t] = std::max(scores[t], mean[static_cast<Eigen::Index>(slot)]);
        }
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Model

EncoderModel::EncoderModel(std::shared_ptr<const Encoder> encoder, Eigen::VectorXd head, double bias, bool trained)
    : encoder_(std::move(encoder)), head_(std::move(head)), bias_(bias), trained_(trained) {
    if (static_cast<std::size_t>(head_.size()) != encoder_->weights().config.hidden) {
        throw ValidationError("classification head size does not match the encoder");
    }
}

double EncoderModel::predict(std::span<const PositionedToken> tokens) const {
    if (tokens.empty()) throw ValidationError("cannot classify an empty token sequence");
    const auto out = encoder_->encode(tokens);
    return sigmoid(out.cls_hidden.dot(head_.transpose()) + bias_);
}

std::vector<double> EncoderModel::attention_saliency(std::span<const PositionedToken> tokens) const {
    if (!trained_) throw UnavailableError("saliency requested from an untrained model");
    if (tokens.empty()) throw ValidationError("saliency requested for an empty token sequence");
    return encoder_->saliency(encoder_->encode(tokens), tokens.size());
}

void EncoderModel::save(std::ostream& out) const {
    out.write(kHeadMagic, 8);
    const std::string& fp = encoder_->fingerprint();
    write_u64(out, fp.size());
    out.write(fp.data(), static_cast<std::streamsize>(fp.size()));
    write_u64(out, static_cast<std::uint64_t>(head_.size()));
    for (Eigen::Index i = 0; i < head_.size(); ++i) write_f64(out, head_[i]);
    write_f64(out, bias_);
}

// ---------------------------------------------------------------------------
// Backend

std::vector<Token> EncoderBackend::tokenize(std::string_view text) const {
    const auto& tok = encoder_->tokenizer();
    auto words = tok.basic_tokens(text);
    if (encoder_->word_merged()) return words;
    std::vector<Token> pieces;
    for (const auto& w : words) {
        std::size_t offset = w.begin;
        for (const auto& p : tok.pieces(w.text)) {
            if (p == "[UNK]") {
                pieces.push_back({p, w.begin, w.end});
                break;
            }
            const std::size_t len = p.rfind("##", 0) == 0 ? p.size() - 2 : p.size();
            pieces.push_back({p, offset, offset + len});
            offset += len;
        }
    }
    return pieces;
}

namespace {

class HeadTrainable final : public TrainableModel {
public:
    HeadTrainable(std::vector<Eigen::RowVectorXd> train_x, std::vector<int> train_y,
                  std::vector<Eigen::RowVectorXd> dev_x, std::vector<int> dev_y, std::size_t hidden)
        : train_x_(std::move(train_x)),
          train_y_(std::move(train_y)),
          dev_x_(std::move(dev_x)),
          dev_y_(std::move(dev_y)),
          params_(hidden + 1, 0.0),
          mask_(hidden + 1, true) {
        mask_.back() = false;
    }

    std::vector<double>& parameters() override { return params_; }
    const std::vector<bool>& decay_mask() const override { return mask_; }
    std::size_t example_count() const override { return train_x_.size(); }
    int example_label(std::size_t i) const override { return train_y_[i]; }

    double probability(const Eigen::RowVectorXd& x) const {
        double z = params_.back();
        for (Eigen::Index j = 0; j < x.size(); ++j) z += params_[static_cast<std::size_t>(j)] * x[j];
        return sigmoid(z);
    }

    void accumulate_gradient(std::size_t i, double weight, std::vector<double>& grad) const override {
        const auto& x = train_x_[i];
        const double dz = weight * (probability(x) - train_y_[i]);
        for (Eigen::Index j = 0; j < x.size(); ++j) grad[static_cast<std::size_t>(j)] += dz * x[j];
        grad.back() += dz;
    }

    double dev_metric() const override {
        std::vector<int> preds;
        for (const auto& x : dev_x_) preds.push_back(probability(x) >= 0.5 ? 1 : 0);
        return dev_y_.empty() ? 0.0 : balanced_accuracy(preds, dev_y_);
    }

private:
    std::vector<Eigen::RowVectorXd> train_x_;
    std::vector<int> train_y_;
    std::vector<Eigen::RowVectorXd> dev_x_;
    std::vector<int> dev_y_;
    std::vector<double> params_;
    std::vector<bool> mask_;
};

}  // namespace

std::unique_ptr<ClassifierModel> EncoderBackend::train(const std::vector<LabeledSequence>& train,
                                                       const std::vector<LabeledSequence>& dev,
                                                       const TrainConfig& config, std::uint64_t seed,
                                                       TrainReport* report) const {
    if (dev.empty()) throw ValidationError("a dev set is required for early stopping");
    auto features = [&](const std::vector<LabeledSequence>& rows, std::vector<Eigen::RowVectorXd>& x,
                        std::vector<int>& y) {
        for (const auto& r : rows) {
            if (r.tokens.empty()) continue;
            x.push_back(encoder_->encode(r.tokens).cls_hidden);
            y.push_back(r.label);
        }
    };
    std::vector<Eigen::RowVectorXd> tx, dx;
    std::vector<int> ty, dy;
    features(train, tx, ty);
    features(dev, dx, dy);
    const std::size_t hidden = encoder_->weights().config.hidden;
    HeadTrainable trainable(std::move(tx), std::move(ty), std::move(dx), std::move(dy), hidden);
    Rng init(seed);
    auto& params = trainable.parameters();
    for (std::size_t j = 0; j < hidden; ++j) params[j] = 0.01 * init.normal();
    TrainReport r = run_training(trainable, config, seed);
    if (report) *report = std::move(r);
    Eigen::VectorXd head(static_cast<Eigen::Index>(hidden));
    for (std::size_t j = 0; j < hidden; ++j) head[static_cast<Eigen::Index>(j)] = params[j];
    return std::make_unique<EncoderModel>(encoder_, std::move(head), params.back(), true);
}

std::unique_ptr<ClassifierModel> EncoderBackend::load(std::istream& in) const {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kHeadMagic, 8) != 0) throw ValidationError("not an encoder head file");
    const std::uint64_t fp_len = read_u64(in);
    if (fp_len > 64) throw ValidationError("corrupt encoder head file");
    std::string fp(fp_len, '\0');
    if (!in.read(fp.data(), static_cast<std::streamsize>(fp_len))) throw ValidationError("truncated encoder head file");
    if (fp != encoder_->fingerprint()) {
        throw ValidationError("classification head was trained on a different encoder (" + fp + " vs " +
                              encoder_->fingerprint() + ")");
    }
    const std::uint64_t size = read_u64(in);
    if (size != encoder_->weights().config.hidden) throw ValidationError("encoder head size mismatch");
    Eigen::VectorXd head(static_cast<Eigen::Index>(size));
    for (Eigen::Index i = 0; i < head.size(); ++i) head[i] = read_f64(in);
    const double bias = read_f64(in);
    return std::make_unique<EncoderModel>(encoder_, std::move(head), bias, true);
}

std::unique_ptr<ClassifierBackend> make_encoder_backend(const BackendOptions& options) {
    if (options.model_dir.empty()) {
        throw UnavailableError("the pretrained-encoder backend needs a model directory with vocab.txt and weights.bin");
    }
    const std::filesystem::path dir(options.model_dir);
    if (!std::filesystem::exists(dir / "weights.bin") || !std::filesystem::exists(dir / "vocab.txt")) {
        throw UnavailableError("encoder model directory " + dir.string() + " lacks vocab.txt or weights.bin");
    }
    auto weights = EncoderWeights::load(dir / "weights.bin");
    const bool lowercase = weights.config.lowercase;
    auto tokenizer = WordPieceTokenizer::load(dir / "vocab.txt", lowercase);
    auto encoder = std::make_shared<const Encoder>(std::move(weights), std::move(tokenizer), options.word_merged);
    return std::make_unique<EncoderBackend>(std::move(encoder));
}

}  // namespace agenda
