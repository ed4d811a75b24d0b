#pragma once

// Discourse-level features: epistemic modality, agency, sentiment polarity,
// emotion spectra. The four families concatenate onto base embeddings to
// form discourse-belief vectors (mean-centered, then row L2-normalized).

#include <array>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "sbg/common.hpp"
#include "sbg/corpus.hpp"

namespace sbg {

// One phrase list, pre-tokenized. Matching is case-insensitive on word
// boundaries, longest match first, non-overlapping within the list.
class PhraseList {
public:
    PhraseList() = default;

    explicit PhraseList(const std::vector<std::string>& phrases) {
        for (const auto& p : phrases) add(p);
    }

    void add(const std::string& phrase) {
        auto toks = tokenize(phrase);
        if (toks.empty()) return;
        max_len_ = std::max(max_len_, toks.size());
        phrases_.insert(join(toks));
    }

    bool empty() const { return phrases_.empty(); }
    size_t size() const { return phrases_.size(); }

    size_t count_matches(const std::vector<std::string>& tokens) const {
        size_t count = 0;
        size_t t = 0;
        while (t < tokens.size()) {
            size_t longest = 0;
            size_t cap = std::min(max_len_, tokens.size() - t);
            for (size_t len = cap; len >= 1; --len) {
                if (phrases_.count(join_range(tokens, t, len))) {
                    longest = len;
                    break;
                }
            }
            if (longest > 0) {
                ++count;
                t += longest;  // non-overlapping
            } else {
                ++t;
            }
        }
        return count;
    }

private:
    static std::string join(const std::vector<std::string>& toks) {
        std::string s;
        for (size_t i = 0; i < toks.size(); ++i) {
            if (i) s += ' ';
            s += toks[i];
        }
        return s;
    }
    static std::string join_range(const std::vector<std::string>& toks, size_t begin, size_t len) {
        std::string s;
        for (size_t i = 0; i < len; ++i) {
            if (i) s += ' ';
            s += toks[begin + i];
        }
        return s;
    }

    std::unordered_set<std::string> phrases_;
    size_t max_len_ = 0;
};

struct Lexicon {
    PhraseList hedge;
    PhraseList certainty;
    PhraseList active;
    PhraseList passive;
};

// Built-in marker lists. Small, auditable, overridable via lexicon file.
inline Lexicon default_lexicon() {
    Lexicon lex;
    lex.hedge = PhraseList({
        "maybe", "perhaps", "i think", "i guess", "i suppose", "possibly", "probably",
        "might", "could be", "not sure", "unsure", "i believe", "seems", "seems like",
        "apparently", "sort of", "kind of", "allegedly", "supposedly", "rumor has it",
        "i heard", "some say", "they say", "arguably", "i wonder", "presumably"});
    lex.certainty = PhraseList({
        "definitely", "clearly", "certainly", "obviously", "undoubtedly", "without a doubt",
        "no doubt", "surely", "absolutely", "always", "never", "must be", "of course",
        "in fact", "the truth is", "everyone knows", "proven", "confirmed", "undeniable",
        "guaranteed", "for sure", "evidently", "plainly", "beyond question", "no question"});
    lex.active = PhraseList({
        "we must", "take action", "we will", "let us", "lets", "we should", "join us",
        "fight", "stand up", "act now", "we can", "do it", "make it happen", "we need to",
        "demand", "organize", "push back", "speak up", "take charge", "mobilize",
        "we are going to", "rise up", "step up", "get involved", "take control"});
    lex.passive = PhraseList({
        "it is said", "was done", "is being", "it was reported", "is said to", "was made",
        "it is believed", "is expected", "was given", "it has been", "is known to",
        "was told", "it is rumored", "are being", "it was decided", "is considered",
        "was forced", "it is claimed", "was taken", "it is thought", "was announced",
        "has been said", "it seems that", "was arranged", "is supposed to"});
    return lex;
}

// Lexicon file: one phrase per line under [hedge]/[certainty]/[active]/[passive].
inline Lexicon load_lexicon(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open lexicon file: " + path);
    Lexicon lex;
    PhraseList* cur = nullptr;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t == "[hedge]") cur = &lex.hedge;
        else if (t == "[certainty]") cur = &lex.certainty;
        else if (t == "[active]") cur = &lex.active;
        else if (t == "[passive]") cur = &lex.passive;
        else if (t[0] == '[')
            fail("lexicon line " + std::to_string(lineno) + ": unknown section " + t);
        else if (!cur)
            fail("lexicon line " + std::to_string(lineno) + ": phrase before any section");
        else cur->add(t);
    }
    return lex;
}

// tanh(#certainties - #hedges)
inline double epistemic_modality(const std::string& text, const PhraseList& hedges,
                                 const PhraseList& certainties) {
    if (hedges.empty() && certainties.empty()) fail("epistemic lexicon is empty");
    auto toks = tokenize(text);
    double c = double(certainties.count_matches(toks));
    double h = double(hedges.count_matches(toks));
    return std::tanh(c - h);
}

// tanh(#actives - #passives)
inline double agency(const std::string& text, const PhraseList& actives,
                     const PhraseList& passives) {
    if (actives.empty() && passives.empty()) fail("agency lexicon is empty");
    auto toks = tokenize(text);
    double a = double(actives.count_matches(toks));
    double p = double(passives.count_matches(toks));
    return std::tanh(a - p);
}

// ---------------------------------------------------------------------------
// Affect scoring

enum class Polarity { Positive, Negative, Neutral };

struct Affect {
    Polarity polarity = Polarity::Neutral;
    double confidence = 0.0;                      // [0, 1]
    std::array<double, 4> emotions{0, 0, 0, 0};   // joy, anger, fear, sadness, each [0, 1]
};

inline double sentiment_polarity(const Affect& a) {
    switch (a.polarity) {
        case Polarity::Positive: return a.confidence;
        case Polarity::Negative: return -a.confidence;
        case Polarity::Neutral: return 0.0;
    }
    return 0.0;
}

class AffectScorer {
public:
    virtual ~AffectScorer() = default;
    virtual Affect score(const Message& msg) const = 0;
};

// Valence word counting. class = sign of (#pos - #neg); confidence =
// |#pos - #neg| / (#pos + #neg). Emotion score = min(1, count/3).
class LexiconAffectScorer : public AffectScorer {
public:
    LexiconAffectScorer() {
        positive_ = {"good", "great", "love", "happy", "thanks", "thank", "hope", "nice",
                     "best", "wonderful", "amazing", "excellent", "support", "agree", "safe",
                     "win", "better", "glad", "awesome", "beautiful", "well", "right",
                     "true", "free", "peace"};
        negative_ = {"bad", "hate", "fear", "angry", "wrong", "lie", "lies", "corrupt",
                     "evil", "scam", "fraud", "dangerous", "death", "die", "kill", "worst",
                     "terrible", "awful", "fake", "poison", "threat", "crisis", "fail",
                     "hurt", "sick"};
        emotion_[0] = {"happy", "joy", "glad", "celebrate", "laugh", "smile", "fun",
                       "delight", "cheer", "excited", "lovely", "yay", "haha", "enjoy", "bless"};
        emotion_[1] = {"angry", "rage", "furious", "outraged", "mad", "disgusting", "hate",
                       "damn", "annoyed", "unacceptable", "insult", "betrayed", "scandal", "shame"};
        emotion_[2] = {"afraid", "fear", "scared", "terrified", "panic", "worry", "worried",
                       "anxious", "danger", "dangerous", "threat", "warning", "alarm", "unsafe"};
        emotion_[3] = {"sad", "cry", "tears", "grief", "mourn", "loss", "lonely", "depressed",
                       "hopeless", "miserable", "sorrow", "regret", "tragic", "disappointed"};
    }

    Affect score(const Message& msg) const override {
        auto toks = tokenize(msg.text);
        double pos = 0, neg = 0;
        std::array<double, 4> ec{0, 0, 0, 0};
        for (const auto& t : toks) {
            if (positive_.count(t)) ++pos;
            if (negative_.count(t)) ++neg;
            for (int e = 0; e < 4; ++e)
                if (emotion_[e].count(t)) ++ec[e];
        }
        Affect a;
        if (pos > neg) a.polarity = Polarity::Positive;
        else if (neg > pos) a.polarity = Polarity::Negative;
        else a.polarity = Polarity::Neutral;
        a.confidence = (pos + neg) > 0 ? std::abs(pos - neg) / (pos + neg) : 0.0;
        for (int e = 0; e < 4; ++e) a.emotions[e] = std::min(1.0, ec[e] / 3.0);
        return a;
    }

private:
    std::unordered_set<std::string> positive_, negative_;
    std::array<std::unordered_set<std::string>, 4> emotion_;
};

// Precomputed scores, e.g. from transformer classifiers run offline.
// File: one record per line, tab-separated:
//   id  class(pos|neg|neu)  confidence  joy  anger  fear  sadness
class PrecomputedAffectScorer : public AffectScorer {
public:
    explicit PrecomputedAffectScorer(const std::string& path) {
        std::ifstream f(path);
        if (!f) fail("cannot open affect file: " + path);
        std::string line;
        size_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            std::istringstream ss(line);
            std::string id, cls;
            Affect a;
            double conf;
            if (!(ss >> id >> cls >> conf >> a.emotions[0] >> a.emotions[1] >> a.emotions[2] >>
                  a.emotions[3]))
                fail("affect file line " + std::to_string(lineno) + ": malformed record");
            if (cls == "pos") a.polarity = Polarity::Positive;
            else if (cls == "neg") a.polarity = Polarity::Negative;
            else if (cls == "neu") a.polarity = Polarity::Neutral;
            else fail("affect file line " + std::to_string(lineno) + ": unknown class '" + cls + "'");
            if (conf < 0.0 || conf > 1.0)
                fail("affect file line " + std::to_string(lineno) + ": confidence out of [0,1]");
            for (double e : a.emotions)
                if (e < 0.0 || e > 1.0)
                    fail("affect file line " + std::to_string(lineno) + ": emotion out of [0,1]");
            a.confidence = conf;
            scores_[id] = a;
        }
    }

    Affect score(const Message& msg) const override {
        auto it = scores_.find(msg.id);
        if (it == scores_.end())
            fail("no precomputed affect scores for message id '" + msg.id + "'");
        return it->second;
    }

private:
    std::unordered_map<std::string, Affect> scores_;
};

// ---------------------------------------------------------------------------
// Discourse vectors and enrichment

struct DiscourseVector {
    double epistemic = 0.0;
    double agency = 0.0;
    double sentiment = 0.0;
    std::array<double, 4> emotions{0, 0, 0, 0};

    std::array<double, 7> as_array() const {
        return {epistemic, agency, sentiment, emotions[0], emotions[1], emotions[2], emotions[3]};
    }
};

inline DiscourseVector discourse_vector(const Message& msg, const Lexicon& lex,
                                        const AffectScorer& scorer) {
    DiscourseVector dv;
    dv.epistemic = epistemic_modality(msg.text, lex.hedge, lex.certainty);
    dv.agency = agency(msg.text, lex.active, lex.passive);
    Affect a = scorer.score(msg);
    dv.sentiment = sentiment_polarity(a);
    dv.emotions = a.emotions;
    return dv;
}

inline std::vector<DiscourseVector> discourse_features(const Corpus& corpus, const Lexicon& lex,
                                                       const AffectScorer& scorer) {
    std::vector<DiscourseVector> out;
    out.reserve(corpus.size());
    for (const auto& m : corpus.messages) out.push_back(discourse_vector(m, lex, scorer));
    return out;
}

// Base embeddings + 7 discourse dims, mean-centered per column over the
// corpus, then each row L2-normalized. Rows that vanish after centering are
// zeroed and flagged; they take no part in graph construction.
struct EnrichedMatrix {
    Mat data;  // N x (d + 7), rows unit norm or exactly zero
    std::vector<std::string> ids;
    std::vector<char> degenerate;  // per-row flag

    size_t rows() const { return size_t(data.rows()); }
    size_t dim() const { return size_t(data.cols()); }
    size_t degenerate_count() const {
        size_t n = 0;
        for (char c : degenerate) n += size_t(c != 0);
        return n;
    }
};

inline EnrichedMatrix enrich(const EmbeddingMatrix& base,
                             const std::vector<DiscourseVector>& discourse) {
    if (base.rows() != discourse.size())
        fail("enrich: base has " + std::to_string(base.rows()) + " rows but " +
             std::to_string(discourse.size()) + " discourse vectors");
    const Eigen::Index n = base.data.rows();
    const Eigen::Index d = base.data.cols();
    EnrichedMatrix em;
    em.data.resize(n, d + 7);
    em.data.leftCols(d) = base.data;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto a = discourse[size_t(i)].as_array();
        for (int k = 0; k < 7; ++k) em.data(i, d + k) = a[size_t(k)];
    }
    Eigen::RowVectorXd mean = em.data.colwise().mean();
    em.data.rowwise() -= mean;
    em.ids = base.row_ids;
    em.degenerate.assign(size_t(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double norm = em.data.row(i).norm();
        if (norm < 1e-9) {
            em.data.row(i).setZero();
            em.degenerate[size_t(i)] = 1;
        } else {
            em.data.row(i) /= norm;
        }
    }
    return em;
}

}  // namespace sbg
