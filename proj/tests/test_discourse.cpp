#include <catch2/catch_amalgamated.hpp>

#include "sbg/discourse.hpp"

using namespace sbg;

namespace {

Message msg(const std::string& text) { return {"id", text, "g", 0, 0}; }

}  // namespace

TEST_CASE("epistemic modality counts markers through tanh", "[discourse]") {
    Lexicon lex = default_lexicon();
    CHECK(epistemic_modality("nothing special here", lex.hedge, lex.certainty) == 0.0);
    // two certainty markers, zero hedges
    CHECK(epistemic_modality("definitely clearly true", lex.hedge, lex.certainty) ==
          Catch::Approx(std::tanh(2.0)).margin(1e-12));
    CHECK(std::tanh(2.0) == Catch::Approx(0.9640275800758169).margin(1e-12));
    // two hedges, zero certainties: sign symmetry
    CHECK(epistemic_modality("maybe, I think so", lex.hedge, lex.certainty) ==
          Catch::Approx(std::tanh(-2.0)).margin(1e-12));
    // case-insensitive, phrase boundaries
    CHECK(epistemic_modality("DEFINITELY!", lex.hedge, lex.certainty) ==
          Catch::Approx(std::tanh(1.0)).margin(1e-12));
}

TEST_CASE("agency counts active/passive markers", "[discourse]") {
    Lexicon lex = default_lexicon();
    CHECK(agency("plain statement", lex.active, lex.passive) == 0.0);
    // "we must" + "take action" = 2 active markers
    CHECK(agency("we must take action", lex.active, lex.passive) ==
          Catch::Approx(std::tanh(2.0)).margin(1e-12));
    // one active + one passive cancel
    CHECK(agency("we must, but it is said otherwise", lex.active, lex.passive) ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("marker matching is longest-match and non-overlapping", "[discourse]") {
    PhraseList pl({"i think", "think"});
    // "i think" consumes both tokens; inner "think" must not double count
    CHECK(pl.count_matches(tokenize("i think so")) == 1);
    CHECK(pl.count_matches(tokenize("think again and think")) == 2);
}

TEST_CASE("swapping lexicon roles negates the score", "[discourse]") {
    Lexicon lex = default_lexicon();
    std::vector<std::string> texts = {
        "maybe definitely",
        "i think it is clearly proven, no doubt",
        "perhaps, possibly, surely",
        "nothing at all",
        "allegedly the truth is out there and everyone knows it",
        "i guess they say it must be of course certainly fine",
    };
    for (const auto& t : texts) {
        double fwd = epistemic_modality(t, lex.hedge, lex.certainty);
        double swapped = epistemic_modality(t, lex.certainty, lex.hedge);
        CAPTURE(t);
        CHECK(fwd == Catch::Approx(-swapped).margin(1e-12));
        CHECK(std::abs(fwd) < 1.0);  // strictly inside the bound
    }
}

TEST_CASE("sentiment polarity is sign times confidence", "[discourse]") {
    Affect a;
    a.polarity = Polarity::Neutral;
    a.confidence = 0.99;
    CHECK(sentiment_polarity(a) == 0.0);
    a.polarity = Polarity::Positive;
    a.confidence = 0.8;
    CHECK(sentiment_polarity(a) == 0.8);
    a.polarity = Polarity::Negative;
    a.confidence = 0.6;
    CHECK(sentiment_polarity(a) == -0.6);
}

TEST_CASE("lexicon affect scorer is deterministic and bounded", "[discourse]") {
    LexiconAffectScorer scorer;
    Affect a = scorer.score(msg("i love this, it is good and wonderful"));
    CHECK(a.polarity == Polarity::Positive);
    CHECK(a.confidence > 0.0);
    CHECK(a.confidence <= 1.0);
    Affect b = scorer.score(msg("this scam is evil and dangerous, a total fraud"));
    CHECK(b.polarity == Polarity::Negative);
    Affect n = scorer.score(msg("the meeting starts at noon"));
    CHECK(n.polarity == Polarity::Neutral);
    CHECK(sentiment_polarity(n) == 0.0);
    // balanced counts are neutral
    Affect bal = scorer.score(msg("good bad"));
    CHECK(bal.polarity == Polarity::Neutral);
    // emotions land in [0,1]
    Affect e = scorer.score(msg("scared terrified panic worry afraid anxious danger"));
    CHECK(e.emotions[2] == 1.0);  // fear, clipped
    for (double v : e.emotions) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("discourse vector stays within component ranges", "[discourse]") {
    Lexicon lex = default_lexicon();
    LexiconAffectScorer scorer;
    auto dv = discourse_vector(
        msg("we must take action, definitely, i love it, but i fear the threat"), lex, scorer);
    CHECK(std::abs(dv.epistemic) <= 1.0);
    CHECK(std::abs(dv.agency) <= 1.0);
    CHECK(std::abs(dv.sentiment) <= 1.0);
    for (double e : dv.emotions) {
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
}

TEST_CASE("enrich concatenates, centers, and normalizes", "[discourse]") {
    // 3 rows, base dim 4 -> enriched dim 11
    EmbeddingMatrix base;
    base.data.resize(3, 4);
    base.data << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0;
    base.row_ids = {"a", "b", "c"};
    std::vector<DiscourseVector> dvs(3);
    dvs[0].epistemic = 0.5;
    dvs[1].agency = -0.5;
    dvs[2].sentiment = 0.25;
    EnrichedMatrix em = enrich(base, dvs);
    REQUIRE(em.dim() == 11);

    // rows unit norm
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(std::abs(em.data.row(i).norm() - 1.0) < 1e-9);
    CHECK(em.degenerate_count() == 0);

    // recompute the pre-normalization matrix: column means vanish
    Mat raw(3, 11);
    raw.setZero();
    raw.leftCols(4) = base.data;
    raw(0, 4) = 0.5;
    raw(1, 5) = -0.5;
    raw(2, 6) = 0.25;
    Mat centered = raw.rowwise() - raw.colwise().mean();
    for (Eigen::Index c = 0; c < centered.cols(); ++c)
        CHECK(std::abs(centered.col(c).mean()) < 1e-7);
}

TEST_CASE("enrich flags rows that vanish after centering", "[discourse]") {
    EmbeddingMatrix base;
    base.data.resize(2, 3);
    base.data << 2, 3, 4, 2, 3, 4;  // identical rows
    base.row_ids = {"a", "b"};
    std::vector<DiscourseVector> dvs(2);  // identical (all zero) discourse
    EnrichedMatrix em = enrich(base, dvs);
    CHECK(em.degenerate_count() == 2);
    CHECK(em.data.isZero(0.0));
}

TEST_CASE("enrich rejects row-count mismatch", "[discourse]") {
    EmbeddingMatrix base;
    base.data.resize(2, 3);
    base.data.setZero();
    base.row_ids = {"a", "b"};
    std::vector<DiscourseVector> dvs(3);
    REQUIRE_THROWS(enrich(base, dvs));
}

TEST_CASE("pipeline featurization is bit-deterministic", "[discourse]") {
    std::vector<Message> msgs;
    msgs.push_back({"a", "maybe the truth is out there", "g", 0, 1});
    msgs.push_back({"b", "we must take action now", "g", 0, 0});
    msgs.push_back({"c", "i love this wonderful day", "g", 0, 0});
    Corpus c = make_corpus(std::move(msgs));
    Lexicon lex = default_lexicon();
    LexiconAffectScorer scorer;
    EmbeddingMatrix base = fallback_featurize(c, 32, 5);
    EnrichedMatrix a = enrich(base, discourse_features(c, lex, scorer));
    EnrichedMatrix b = enrich(base, discourse_features(c, lex, scorer));
    CHECK(a.data == b.data);
}
