#pragma once

#include "agenda/backend.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace agenda {

struct EncoderConfig {
    std::size_t vocab_size = 0;
    std::size_t hidden = 32;
    std::size_t layers = 2;
    std::size_t heads = 2;
    std::size_t intermediate = 64;
    std::size_t max_positions = 128;
    bool lowercase = true;
};

/// Weights of a post-layer-norm transformer encoder in the BERT layout.
/// Matrices are stored input-major: y = x * W + b.
struct EncoderWeights {
    struct Layer {
        Eigen::MatrixXd wq, wk, wv, wo, w1, w2;
        Eigen::RowVectorXd bq, bk, bv, bo, b1, b2;
        Eigen::RowVectorXd ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;
    };

    EncoderConfig config;
    Eigen::MatrixXd word_embeddings;      // vocab x hidden
    Eigen::MatrixXd position_embeddings;  // max_positions x hidden
    Eigen::RowVectorXd token_type_embedding;
    Eigen::RowVectorXd embedding_ln_gamma, embedding_ln_beta;
    std::vector<Layer> layers;

    /// Seeded random initialization (normal with `init_std`), mainly for tests.
    static EncoderWeights random(const EncoderConfig& config, std::uint64_t seed, double init_std = 0.02);
    static EncoderWeights load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
    /// FNV-1a hash over every parameter, hex encoded.
    std::string fingerprint() const;
};

/// Greedy longest-match-first WordPiece over a basic tokenizer that splits
/// on whitespace and punctuation.
class WordPieceTokenizer {
public:
    WordPieceTokenizer() = default;
    WordPieceTokenizer(std::vector<std::string> vocab, bool lowercase);
    static WordPieceTokenizer load(const std::filesystem::path& vocab_file, bool lowercase);

    /// Words and punctuation marks with byte offsets.
    std::vector<Token> basic_tokens(std::string_view text) const;
    /// Sub-word pieces of one basic token ("##" marks continuations).
    std::vector<std::string> pieces(std::string_view word) const;

    int id(std::string_view piece) const;
    int cls_id() const { return cls_; }
    int sep_id() const { return sep_; }
    int unk_id() const { return unk_; }
    std::size_t size() const { return vocab_.size(); }
    bool lowercase() const { return lowercase_; }

private:
    std::vector<std::string> vocab_;
    std::unordered_map<std::string, int> ids_;
    bool lowercase_ = true;
    int cls_ = 0, sep_ = 0, unk_ = 0;
};

struct EncoderOutput {
    Eigen::RowVectorXd cls_hidden;
    /// [layer][head] attention of the classification token over all positions.
    std::vector<std::vector<Eigen::RowVectorXd>> cls_attention;
    /// For every input token, the encoder positions holding its pieces.
    std::vector<std::vector<std::size_t>> token_slots;
};

/// Frozen encoder shared by every model of one backend instance.
class Encoder {
public:
    Encoder(EncoderWeights weights, WordPieceTokenizer tokenizer, bool word_merged);

    /// Encodes the tokens as [CLS] pieces... [SEP]. Tokens are whole words in
    /// word-merged mode and single pieces otherwise. Pieces past the position
    /// limit are dropped (truncation from the end).
    EncoderOutput encode(std::span<const PositionedToken> tokens) const;

    /// Classification-token attention in the penultimate layer, averaged over
    /// heads; a word's score is the max over its pieces. Dropped tokens score 0.
    std::vector<double> saliency(const EncoderOutput& out, std::size_t token_count) const;

    const EncoderWeights& weights() const { return weights_; }
    const WordPieceTokenizer& tokenizer() const { return tokenizer_; }
    bool word_merged() const { return word_merged_; }
    const std::string& fingerprint() const { return fingerprint_; }

private:
    EncoderWeights weights_;
    WordPieceTokenizer tokenizer_;
    bool word_merged_;
    std::string fingerprint_;
};

/// Logistic head on the final classification-token state.
class EncoderModel final : public ClassifierModel {
public:
    EncoderModel(std::shared_ptr<const Encoder> encoder, Eigen::VectorXd head, double bias, bool trained);

    std::string backend_id() const override { return "pretrained-encoder"; }
    bool trained() const override { return trained_; }
    double predict(std::span<const PositionedToken> tokens) const override;
    std::vector<double> attention_saliency(std::span<const PositionedToken> tokens) const override;
    void save(std::ostream& out) const override;

    const Eigen::VectorXd& head() const { return head_; }
    double bias() const { return bias_; }

private:
    std::shared_ptr<const Encoder> encoder_;
    Eigen::VectorXd head_;
    double bias_;
    bool trained_;
};

class EncoderBackend final : public ClassifierBackend {
public:
    explicit EncoderBackend(std::shared_ptr<const Encoder> encoder) : encoder_(std::move(encoder)) {}

    std::string id() const override { return "pretrained-encoder"; }
    /// Basic tokens in word-merged mode, WordPiece pieces otherwise.
    std::vector<Token> tokenize(std::string_view text) const override;
    std::unique_ptr<ClassifierModel> train(const std::vector<LabeledSequence>& train,
                                           const std::vector<LabeledSequence>& dev, const TrainConfig& config,
                                           std::uint64_t seed, TrainReport* report) const override;
    std::unique_ptr<ClassifierModel> load(std::istream& in) const override;

    const Encoder& encoder() const { return *encoder_; }

private:
    std::shared_ptr<const Encoder> encoder_;
};

/// Reads vocab.txt and weights.bin from options.model_dir.
std::unique_ptr<ClassifierBackend> make_encoder_backend(const BackendOptions& options);

}  // namespace agenda
