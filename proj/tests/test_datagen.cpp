#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "apa/datagen.hpp"

using namespace apa;

TEST_CASE("exponential class-size profile") {
    LongTailSpec spec;
    spec.classes = 2;
    spec.n_max = 100;
    spec.imbalance = 100.0;
    const auto two = longtail_class_sizes(spec);
    CHECK(two[0] == 100);
    CHECK(two[1] == 1);

    spec.classes = 10;
    spec.n_max = 500;
    spec.imbalance = 10.0;
    const auto ten = longtail_class_sizes(spec);
    CHECK(ten[0] == 500);
    CHECK(ten[9] == 50);
    const double ratio = static_cast<double>(ten[0]) / static_cast<double>(ten[9]);
    CHECK(ratio == doctest::Approx(10.0).epsilon(0.02));
    for (std::size_t k = 1; k < 10; ++k) CHECK(ten[k] <= ten[k - 1]);

    spec.imbalance = 1.0;
    for (std::size_t s : longtail_class_sizes(spec)) CHECK(s == 500);

    spec.n_max = 10;
    spec.imbalance = 1000.0;
    CHECK_THROWS_AS(longtail_class_sizes(spec), std::invalid_argument);
}

TEST_CASE("longtail dataset layout and determinism") {
    LongTailSpec spec;
    spec.classes = 6;
    spec.dim = 4;
    spec.n_max = 40;
    spec.imbalance = 20.0;
    spec.seed = 31415;

    const auto a = make_longtail(spec);
    const auto b = make_longtail(spec);
    CHECK(a.features.data == b.features.data);
    CHECK(a.labels == b.labels);

    spec.seed = 31416;
    const auto c = make_longtail(spec);
    CHECK(a.features.data != c.features.data);

    std::vector<std::size_t> counts(spec.classes, 0);
    for (int y : a.labels) {
        CHECK(y >= 0);
        CHECK(static_cast<std::size_t>(y) < spec.classes);
        ++counts[static_cast<std::size_t>(y)];
    }
    CHECK(counts == a.class_sizes);
    CHECK(a.class_groups.size() == spec.classes);
    CHECK(a.class_groups.front() == Group::Many);
    CHECK(a.class_groups.back() == Group::Few);
    CHECK(a.features.all_finite());
}

TEST_CASE("balanced eval set shares centers but not draws") {
    LongTailSpec spec;
    spec.classes = 4;
    spec.dim = 8;
    spec.n_max = 60;
    spec.imbalance = 10.0;
    spec.seed = 7;

    const auto train = make_longtail(spec);
    const auto eval = make_balanced_eval(spec, 25);
    CHECK(eval.features.rows == 4 * 25);
    // Groups still reflect the imbalanced training profile.
    CHECK(eval.class_groups == train.class_groups);

    // Same underlying centers: per-class means of the two sets agree to
    // sampling error, far tighter than the center separation.
    for (std::size_t cls = 0; cls < spec.classes; ++cls) {
        for (std::size_t j = 0; j < spec.dim; ++j) {
            double m_train = 0.0, m_eval = 0.0;
            std::size_t n_train = 0, n_eval = 0;
            for (std::size_t i = 0; i < train.features.rows; ++i)
                if (train.labels[i] == static_cast<int>(cls)) {
                    m_train += train.features.at(i, j);
                    ++n_train;
                }
            for (std::size_t i = 0; i < eval.features.rows; ++i)
                if (eval.labels[i] == static_cast<int>(cls)) {
                    m_eval += eval.features.at(i, j);
                    ++n_eval;
                }
            m_train /= static_cast<double>(n_train);
            m_eval /= static_cast<double>(n_eval);
            CHECK(std::fabs(m_train - m_eval) < 0.5);
        }
    }
}

TEST_CASE("theoretical sampling is deterministic and matches known moments") {
    const auto a = sample_theoretical(CdfFamily::Gumbel, 0.0, 1.0, 100000, 2718);
    const auto b = sample_theoretical(CdfFamily::Gumbel, 0.0, 1.0, 100000, 2718);
    CHECK(a.samples == b.samples);

    // Standard Gumbel mean is the Euler-Mascheroni constant.
    CHECK(std::fabs(a.mean - 0.5772156649) < 0.02);

    const auto logi = sample_theoretical(CdfFamily::Logistic, -2.0, 0.5, 100000, 3);
    CHECK(std::fabs(logi.mean + 2.0) < 0.02);

    CHECK_THROWS_AS(sample_theoretical(CdfFamily::Gumbel, 0.0, 0.0, 100, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_theoretical(CdfFamily::Gumbel, 0.0, 1.0, 1, 1),
                    std::invalid_argument);
}

TEST_CASE("spec validation") {
    LongTailSpec spec;
    spec.classes = 1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.classes = 3;
    spec.spread = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.spread = 0.3;
    spec.imbalance = 0.5;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
