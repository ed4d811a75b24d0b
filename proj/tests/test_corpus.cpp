#include <catch2/catch_amalgamated.hpp>

#include "sbg/corpus.hpp"
#include "test_util.hpp"

using namespace sbg;

namespace {

std::string record(const std::string& id, const std::string& text, int label) {
    nlohmann::json j;
    j["id"] = id;
    j["text"] = text;
    j["group"] = "g";
    j["timestamp"] = 100;
    j["label"] = label;
    return j.dump() + "\n";
}

Corpus tiny_corpus(size_t n) {
    std::vector<Message> msgs;
    for (size_t i = 0; i < n; ++i)
        msgs.push_back({"m" + std::to_string(i), "text number " + std::to_string(i), "g",
                        int64_t(100 + i), int(i % 2)});
    return make_corpus(std::move(msgs));
}

}  // namespace

TEST_CASE("load_corpus basic ordering and index", "[corpus]") {
    TempDir td("corpus_basic");
    write_file(td.path("c.jsonl"),
               record("a", "first", 0) + record("b", "second", 1) + record("c", "third", 0));
    Corpus c = load_corpus(td.path("c.jsonl"));
    REQUIRE(c.size() == 3);
    CHECK(c.index.at("a") == 0);
    CHECK(c.index.at("b") == 1);
    CHECK(c.index.at("c") == 2);
    CHECK(c.messages[1].label == 1);
}

TEST_CASE("load_corpus rejects duplicates naming the id", "[corpus]") {
    TempDir td("corpus_dup");
    write_file(td.path("c.jsonl"),
               record("m1", "x", 0) + record("m2", "y", 1) + record("m1", "z", 0));
    REQUIRE_THROWS_WITH(load_corpus(td.path("c.jsonl")),
                        Catch::Matchers::ContainsSubstring("m1"));
}

TEST_CASE("load_corpus error paths name the line", "[corpus]") {
    TempDir td("corpus_err");
    SECTION("malformed json") {
        write_file(td.path("c.jsonl"), record("a", "x", 0) + "{not json\n");
        REQUIRE_THROWS_WITH(load_corpus(td.path("c.jsonl")),
                            Catch::Matchers::ContainsSubstring("line 2"));
    }
    SECTION("label out of range") {
        write_file(td.path("c.jsonl"), record("a", "x", 2));
        REQUIRE_THROWS_WITH(load_corpus(td.path("c.jsonl")),
                            Catch::Matchers::ContainsSubstring("label"));
    }
    SECTION("empty text") {
        write_file(td.path("c.jsonl"), record("a", "   ", 0));
        REQUIRE_THROWS_WITH(load_corpus(td.path("c.jsonl")),
                            Catch::Matchers::ContainsSubstring("text"));
    }
    SECTION("unknown field") {
        write_file(td.path("c.jsonl"),
                   "{\"id\":\"a\",\"text\":\"x\",\"group\":\"g\",\"timestamp\":1,\"label\":0,"
                   "\"extra\":1}\n");
        REQUIRE_THROWS_WITH(load_corpus(td.path("c.jsonl")),
                            Catch::Matchers::ContainsSubstring("extra"));
    }
}

TEST_CASE("empty corpus file loads as size 0", "[corpus]") {
    TempDir td("corpus_empty");
    write_file(td.path("c.jsonl"), "");
    Corpus c = load_corpus(td.path("c.jsonl"));
    CHECK(c.size() == 0);
}

TEST_CASE("corpus canonical round-trip is byte identical", "[corpus]") {
    TempDir td("corpus_rt");
    // mixed unicode + punctuation content
    std::vector<Message> msgs;
    msgs.push_back({"id1", "hello \"world\" \xE4\xBD\xA0\xE5\xA5\xBD", "grp a", -5, 1});
    msgs.push_back({"id2", "tab\tand\nnewline", "grp b", 1700000000, 0});
    Corpus c = make_corpus(std::move(msgs));
    save_corpus(c, td.path("c1.jsonl"));
    Corpus c2 = load_corpus(td.path("c1.jsonl"));
    save_corpus(c2, td.path("c2.jsonl"));
    CHECK(read_file(td.path("c1.jsonl")) == read_file(td.path("c2.jsonl")));
    REQUIRE(c2.size() == 2);
    CHECK(c2.messages[0].text == c.messages[0].text);
    CHECK(c2.messages[1].timestamp == 1700000000);
}

TEST_CASE("embedding save/load round-trip is bit exact", "[corpus]") {
    TempDir td("emb_rt");
    Corpus c = tiny_corpus(3);
    EmbeddingMatrix em;
    em.data.resize(3, 4);
    em.data << 0.1, -2.5, 3.25, 0.0, 1e-7, 42.0, -0.5, 9.75, 1.5, 2.5, -3.5, 0.125;
    // values must be float32-representable for bit-exactness; cast first
    for (Eigen::Index i = 0; i < em.data.rows(); ++i)
        for (Eigen::Index k = 0; k < em.data.cols(); ++k)
            em.data(i, k) = double(float(em.data(i, k)));
    em.row_ids = {"m0", "m1", "m2"};
    save_embeddings(em, td.path("e.sbem"));
    EmbeddingMatrix back = load_embeddings(td.path("e.sbem"), c);
    REQUIRE(back.rows() == 3);
    REQUIRE(back.dim() == 4);
    CHECK(back.data == em.data);
    CHECK(back.row_ids == em.row_ids);

    // saving again reproduces identical bytes
    save_embeddings(back, td.path("e2.sbem"));
    CHECK(read_file(td.path("e.sbem")) == read_file(td.path("e2.sbem")));
    CHECK(read_file(td.path("e.sbem.ids")) == read_file(td.path("e2.sbem.ids")));
}

TEST_CASE("load_embeddings reorders to corpus order", "[corpus]") {
    TempDir td("emb_order");
    Corpus c = tiny_corpus(2);
    EmbeddingMatrix em;
    em.data.resize(2, 2);
    em.data << 10, 11, 20, 21;
    em.row_ids = {"m1", "m0"};  // reversed
    save_embeddings(em, td.path("e.sbem"));
    EmbeddingMatrix back = load_embeddings(td.path("e.sbem"), c);
    CHECK(back.row_ids[0] == "m0");
    CHECK(back.data(0, 0) == 20.0);
    CHECK(back.data(1, 0) == 10.0);
}

TEST_CASE("load_embeddings error paths", "[corpus]") {
    TempDir td("emb_err");
    Corpus c = tiny_corpus(2);
    SECTION("unknown row id") {
        EmbeddingMatrix em;
        em.data.resize(2, 2);
        em.data << 1, 2, 3, 4;
        em.row_ids = {"m0", "zz"};
        save_embeddings(em, td.path("e.sbem"));
        REQUIRE_THROWS_WITH(load_embeddings(td.path("e.sbem"), c),
                            Catch::Matchers::ContainsSubstring("zz"));
    }
    SECTION("row count mismatch") {
        EmbeddingMatrix em;
        em.data.resize(1, 2);
        em.data << 1, 2;
        em.row_ids = {"m0"};
        save_embeddings(em, td.path("e.sbem"));
        REQUIRE_THROWS(load_embeddings(td.path("e.sbem"), c));
    }
    SECTION("NaN rejected") {
        // write a file with a NaN by hand
        std::ofstream f(td.path("e.sbem"), std::ios::binary);
        f.write("SBEM", 4);
        write_u32(f, 1);
        write_u32(f, 2);
        write_f32(f, 1.0f);
        write_f32(f, std::numeric_limits<float>::quiet_NaN());
        f.close();
        write_file(td.path("e.sbem.ids"), "m0\n");
        REQUIRE_THROWS_WITH(read_embeddings(td.path("e.sbem")),
                            Catch::Matchers::ContainsSubstring("non-finite"));
    }
    SECTION("truncated payload is a dimensionality error") {
        std::ofstream f(td.path("e.sbem"), std::ios::binary);
        f.write("SBEM", 4);
        write_u32(f, 2);
        write_u32(f, 2);
        write_f32(f, 1.0f);
        write_f32(f, 2.0f);
        write_f32(f, 3.0f);  // one value short
        f.close();
        write_file(td.path("e.sbem.ids"), "m0\nm1\n");
        REQUIRE_THROWS(read_embeddings(td.path("e.sbem")));
    }
}

TEST_CASE("fallback featurizer determinism and normalization", "[corpus]") {
    std::vector<Message> msgs;
    msgs.push_back({"a", "the same exact text", "g", 0, 0});
    msgs.push_back({"b", "the same exact text", "g", 0, 1});
    msgs.push_back({"c", "completely different words here", "g", 0, 0});
    Corpus c = make_corpus(std::move(msgs));
    EmbeddingMatrix em = fallback_featurize(c, 64, 7);

    // identical texts -> bit-identical rows
    CHECK(em.data.row(0) == em.data.row(1));
    // rows are unit norm
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(std::abs(em.data.row(i).norm() - 1.0) < 1e-9);
    // pure function: same inputs give bit-equal outputs
    EmbeddingMatrix em2 = fallback_featurize(c, 64, 7);
    CHECK(em.data == em2.data);
    // different seed changes the embedding
    EmbeddingMatrix em3 = fallback_featurize(c, 64, 8);
    CHECK(em.data != em3.data);

    REQUIRE_THROWS(fallback_featurize(c, 4, 7));  // dim too small
}

TEST_CASE("fallback featurizer golden cosine", "[corpus]") {
    std::vector<Message> msgs;
    msgs.push_back({"a", "vaccines are a government plot to control us", "g", 0, 1});
    msgs.push_back({"b", "the hawker centre reopens tomorrow after cleaning", "g", 0, 0});
    Corpus c = make_corpus(std::move(msgs));
    EmbeddingMatrix em = fallback_featurize(c, 256, 42);
    double cos = em.data.row(0).dot(em.data.row(1));
    CHECK(cos < 1.0);
    // golden value frozen from the deterministic featurizer (dim 256, seed 42)
    CHECK(cos == Catch::Approx(0.27195852455423808).epsilon(0).margin(1e-15));
}
