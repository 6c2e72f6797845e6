#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "qksvm/error.hpp"
#include "qksvm/sampling.hpp"

using namespace qksvm;

namespace {

std::vector<Superpixel> make_pool(int cloud, int clear) {
    std::vector<Superpixel> pool;
    for (int i = 0; i < cloud + clear; ++i) {
        Superpixel s;
        s.label = i < cloud ? 1 : -1;
        s.features.fill(1.0 + i);  // unique, never all-zero
        pool.push_back(s);
    }
    return pool;
}

}  // namespace

TEST(BalancedSample, CompositionN10) {
    const auto pool = make_pool(30, 30);
    const auto d = balanced_sample(pool, 10, 1);
    ASSERT_EQ(d.size(), 10u);
    int pos = 0, zero_rows = 0, margin = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        pos += d.y[i] == 1;
        const bool zero = d.X.row(static_cast<Eigen::Index>(i)).isZero(0.0);
        zero_rows += zero;
        if (d.source[i] < 0) {
            ++margin;
            EXPECT_TRUE(zero);
            EXPECT_EQ(d.y[i], -1);
        } else {
            EXPECT_EQ(pool[static_cast<std::size_t>(d.source[i])].label, d.y[i]);
        }
    }
    EXPECT_EQ(pos, 5);
    EXPECT_EQ(zero_rows, 1);
    EXPECT_EQ(margin, 1);
    std::set<long> src(d.source.begin(), d.source.end());
    EXPECT_EQ(src.size(), 10u);
}

TEST(BalancedSample, SeedBehaviour) {
    const auto pool = make_pool(40, 40);
    const auto a = balanced_sample(pool, 20, 5);
    const auto b = balanced_sample(pool, 20, 5);
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.source, b.source);
    EXPECT_NE(balanced_sample(pool, 20, 6).source, a.source);
}

TEST(BalancedSample, Rejections) {
    const auto pool = make_pool(10, 10);
    EXPECT_THROW(balanced_sample(pool, 3, 0), ValidationError);
    EXPECT_THROW(balanced_sample(pool, 2, 0), ValidationError);
    EXPECT_THROW(balanced_sample(make_pool(4, 40), 10, 0), SamplingError);
    EXPECT_THROW(balanced_sample(make_pool(40, 3), 10, 0), SamplingError);
    EXPECT_NO_THROW(balanced_sample(make_pool(5, 4), 10, 0));
}

TEST(ValidationSample, DisjointAndBalanced) {
    const auto pool = make_pool(400, 400);
    const auto train = balanced_sample(pool, 40, 2);
    const auto val = validation_sample(pool, train, 40, 3);
    EXPECT_EQ(val.size(), 300u);
    int pos = 0;
    for (int v : val.y) pos += v == 1;
    EXPECT_EQ(pos, 150);
    const std::set<long> used(train.source.begin(), train.source.end());
    for (long s : val.source) {
        EXPECT_GE(s, 0);
        EXPECT_EQ(used.count(s), 0u);
    }
    EXPECT_EQ(validation_sample(pool, train, 800, 3).size(), 400u);
    EXPECT_EQ(validation_sample(pool, train, 1600, 3).size(), 760u);
}

TEST(ValidationSample, CappedByPool) {
    const auto pool = make_pool(30, 50);
    const auto train = balanced_sample(pool, 20, 1);
    const auto val = validation_sample(pool, train, 20, 4);
    // 20 cloud rows remain, so both classes are capped at 20.
    EXPECT_EQ(val.size(), 40u);
}

TEST(ToDataset, Shapes) {
    const auto pool = make_pool(2, 1);
    const auto d = to_dataset(pool);
    EXPECT_EQ(d.X.rows(), 3);
    EXPECT_EQ(d.X.cols(), kFeatureCount);
    EXPECT_EQ(d.y, (std::vector<int>{1, 1, -1}));
    EXPECT_EQ(d.source, (std::vector<long>{0, 1, 2}));
}
