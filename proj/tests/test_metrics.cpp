#include <catch2/catch_amalgamated.hpp>

#include "sbg/metrics.hpp"

using namespace sbg;

namespace {

Corpus corpus_from_texts(const std::vector<std::string>& texts) {
    std::vector<Message> msgs;
    for (size_t i = 0; i < texts.size(); ++i)
        msgs.push_back({"m" + std::to_string(i), texts[i], "g", int64_t(i), 0});
    return make_corpus(std::move(msgs));
}

// direct per-definition DBI, loop based, for cross-checking
double dbi_reference(const Mat& y, const std::vector<uint32_t>& labels) {
    uint32_t k = 0;
    for (uint32_t l : labels) k = std::max(k, l + 1);
    std::vector<std::vector<int>> members(k);
    for (size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(int(i));
    std::vector<Eigen::RowVectorXd> cent(k);
    std::vector<double> s(k, 0.0);
    for (uint32_t c = 0; c < k; ++c) {
        Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(y.cols());
        for (int i : members[c]) m += y.row(i);
        m /= double(members[c].size());
        cent[c] = m;
        for (int i : members[c]) s[c] += (y.row(i) - m).norm();
        s[c] /= double(members[c].size());
    }
    double total = 0;
    for (uint32_t i = 0; i < k; ++i) {
        double worst = 0;
        for (uint32_t j = 0; j < k; ++j) {
            if (i == j) continue;
            worst = std::max(worst, (s[i] + s[j]) / (cent[i] - cent[j]).norm());
        }
        total += worst;
    }
    return total / double(k);
}

}  // namespace

TEST_CASE("dbi of two singleton clusters is zero", "[metrics]") {
    Mat y(2, 2);
    y << 0, 0, 5, 0;
    std::vector<uint32_t> labels = {0, 1};
    CHECK(davies_bouldin(y, labels) == 0.0);
}

TEST_CASE("dbi hand geometry", "[metrics]") {
    // two clusters of two points at +-0.5 around centroids 10 apart
    Mat y(4, 1);
    y << -0.5, 0.5, 9.5, 10.5;
    std::vector<uint32_t> labels = {0, 0, 1, 1};
    CHECK(davies_bouldin(y, labels) == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("dbi agrees with an independent reference on random data", "[metrics]") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        int n = 20 + rep * 8;
        Mat y(n, 3);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < 3; ++k) y(i, k) = rng.normal();
        std::vector<uint32_t> labels(static_cast<size_t>(n));
        uint32_t kk = 2 + uint32_t(rep % 4);
        for (int i = 0; i < n; ++i) labels[size_t(i)] = uint32_t(i) % kk;
        CHECK(davies_bouldin(y, labels) ==
              Catch::Approx(dbi_reference(y, labels)).margin(1e-9));
    }
}

TEST_CASE("dbi errors on identical centroids", "[metrics]") {
    Mat y(4, 2);
    y << 1, 1, -1, -1, 1, 1, -1, -1;
    std::vector<uint32_t> labels = {0, 0, 1, 1};
    REQUIRE_THROWS_WITH(davies_bouldin(y, labels),
                        Catch::Matchers::ContainsSubstring("zero centroid separation"));
}

TEST_CASE("cdbi reproduces the reference ratios", "[metrics]") {
    CHECK(cdbi(3.233, 0.386) == Catch::Approx(8.38).margin(0.01));
    CHECK(cdbi(4.502, 0.331) == Catch::Approx(13.60).margin(0.01));
    REQUIRE_THROWS_WITH(cdbi(1.0, 0.0), Catch::Matchers::ContainsSubstring("cDBI undefined"));
    REQUIRE_THROWS(cdbi(1.0, -0.5));
}

TEST_CASE("cdbi is monotone in both arguments", "[metrics]") {
    CHECK(cdbi(4.0, 0.4) > cdbi(3.0, 0.4));
    CHECK(cdbi(3.0, 0.5) < cdbi(3.0, 0.4));
}

TEST_CASE("coherence is 1 for terms that always co-occur", "[metrics]") {
    // two terms in half the messages, always together
    std::vector<std::string> texts;
    for (int i = 0; i < 5; ++i) texts.push_back("alpha beta");
    for (int i = 0; i < 5; ++i) texts.push_back("gamma delta");
    Corpus c = corpus_from_texts(texts);
    std::vector<uint32_t> labels(10, 0);
    for (size_t i = 5; i < 10; ++i) labels[i] = 1;
    CoherenceResult r = coherence(c, labels, 10);
    CHECK(r.per_cluster[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.per_cluster[1] == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.average == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("coherence goes negative for never co-occurring terms", "[metrics]") {
    // one cluster whose top terms never share a message
    std::vector<std::string> texts;
    for (int i = 0; i < 6; ++i) texts.push_back(i % 2 ? "apple apple" : "orange orange");
    Corpus c = corpus_from_texts(texts);
    std::vector<uint32_t> labels(6, 0);
    CoherenceResult r = coherence(c, labels, 2);
    CHECK(std::isfinite(r.per_cluster[0]));
    CHECK(r.per_cluster[0] < 0.0);
}

TEST_CASE("coherence of identical messages is 1", "[metrics]") {
    std::vector<std::string> texts(4, "the same exact words everywhere");
    Corpus c = corpus_from_texts(texts);
    std::vector<uint32_t> labels(4, 0);
    CoherenceResult r = coherence(c, labels, 10);
    CHECK(r.average == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cluster with fewer than two distinct terms scores zero with a flag", "[metrics]") {
    std::vector<std::string> texts = {"solo solo solo", "alpha beta gamma"};
    Corpus c = corpus_from_texts(texts);
    std::vector<uint32_t> labels = {0, 1};
    CoherenceResult r = coherence(c, labels, 10);
    CHECK(r.per_cluster[0] == 0.0);
    REQUIRE(r.degenerate_clusters.size() == 1);
    CHECK(r.degenerate_clusters[0] == 0);
}

TEST_CASE("coherence is invariant to message order", "[metrics]") {
    std::vector<std::string> texts = {"alpha beta common", "alpha gamma common",
                                      "delta beta words", "delta gamma words",
                                      "alpha beta gamma delta"};
    Corpus c = corpus_from_texts(texts);
    std::vector<uint32_t> labels = {0, 0, 1, 1, 0};
    CoherenceResult fwd = coherence(c, labels, 5);

    std::vector<size_t> perm = {4, 2, 0, 3, 1};
    std::vector<std::string> texts2;
    std::vector<uint32_t> labels2;
    for (size_t p : perm) {
        texts2.push_back(texts[p]);
        labels2.push_back(labels[p]);
    }
    Corpus c2 = corpus_from_texts(texts2);
    CoherenceResult bwd = coherence(c2, labels2, 5);
    CHECK(fwd.average == Catch::Approx(bwd.average).margin(1e-12));
}

TEST_CASE("coherence is stable under corpus duplication", "[metrics]") {
    std::vector<std::string> texts;
    for (int i = 0; i < 40; ++i)
        texts.push_back(i % 2 ? "alpha beta shared words" : "gamma delta shared words");
    Corpus c = corpus_from_texts(texts);
    std::vector<uint32_t> labels(40);
    for (size_t i = 0; i < 40; ++i) labels[i] = uint32_t(i % 2);
    CoherenceResult one = coherence(c, labels, 4);

    std::vector<std::string> doubled = texts;
    doubled.insert(doubled.end(), texts.begin(), texts.end());
    Corpus c2 = corpus_from_texts(doubled);
    std::vector<uint32_t> labels2 = labels;
    labels2.insert(labels2.end(), labels.begin(), labels.end());
    CoherenceResult two = coherence(c2, labels2, 4);
    // add-one smoothing shifts values by O(1/D); invariance holds to that order
    CHECK(one.average == Catch::Approx(two.average).margin(0.05));
}

TEST_CASE("adjusted rand basics", "[metrics]") {
    std::vector<uint32_t> a = {0, 0, 1, 1, 2, 2};
    CHECK(adjusted_rand(a, a) == Catch::Approx(1.0).margin(1e-12));
    // permuted cluster ids are the same partition
    std::vector<uint32_t> b = {2, 2, 0, 0, 1, 1};
    CHECK(adjusted_rand(a, b) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("adjusted rand hand value for the crossed 4-point case", "[metrics]") {
    // contingency [[1,1],[1,1]]: index 0, expected 2/3, max 2 -> ARI = -1/2
    std::vector<uint32_t> a = {0, 0, 1, 1};
    std::vector<uint32_t> b = {0, 1, 0, 1};
    CHECK(adjusted_rand(a, b) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(adjusted_rand(b, a) == Catch::Approx(-0.5).margin(1e-12));
}

TEST_CASE("kmeans recovers trivially separated blobs", "[metrics]") {
    Rng rng(6);
    Mat y(30, 2);
    for (int i = 0; i < 30; ++i) {
        double cx = i < 15 ? 0.0 : 50.0;
        y(i, 0) = cx + rng.normal();
        y(i, 1) = rng.normal();
    }
    auto labels = kmeans(y, 2, 1);
    std::vector<uint32_t> truth(30);
    for (size_t i = 15; i < 30; ++i) truth[i] = 1;
    CHECK(adjusted_rand(labels, truth) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("evaluate_clustering assembles a consistent report", "[metrics]") {
    std::vector<std::string> texts;
    Rng rng(8);
    Mat y(20, 2);
    std::vector<uint32_t> labels(20);
    for (int i = 0; i < 20; ++i) {
        bool left = i < 10;
        texts.push_back(left ? "alpha beta topic one" : "gamma delta topic two");
        labels[size_t(i)] = left ? 0 : 1;
        y(i, 0) = (left ? 0.0 : 10.0) + 0.1 * rng.normal();
        y(i, 1) = 0.1 * rng.normal();
    }
    Corpus c = corpus_from_texts(texts);
    MetricsReport rep = evaluate_clustering(c, y, labels, 4);
    REQUIRE(rep.dbi_defined);
    REQUIRE(rep.cdbi_defined);
    CHECK(rep.cdbi_value == Catch::Approx(rep.dbi / rep.avg_coherence).margin(1e-12));
    REQUIRE(rep.per_cluster.size() == 2);
    CHECK(rep.per_cluster[0].size == 10);
    CHECK(rep.per_cluster[1].size == 10);
    CHECK(rep.silhouette > 0.9);
}
