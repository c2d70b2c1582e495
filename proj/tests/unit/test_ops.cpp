#include <cmath>

#include <doctest.h>

#include "chronoseries/error.hpp"
#include "chronoseries/ops.hpp"
#include "test_support.hpp"

using namespace chronoseries;
using namespace chronoseries::testing;

namespace {

TimeSeries small() {
    auto builder = TimeSeries::Builder::points({"a", "b"});
    builder.append(Timestamp{0}, {1.0, 10.0});
    builder.append(Timestamp{10}, {3.0, 20.0});
    builder.append(Timestamp{20}, {2.0, 0.0});
    builder.append(Timestamp{30}, {6.0, 10.0});
    return std::move(builder).build();
}

}  // namespace

TEST_CASE("reductions") {
    const auto s = small();
    CHECK(ops::min(s).at("a") == 1.0);
    CHECK(ops::max(s).at("b") == 20.0);
    CHECK(ops::sum(s).at("a") == 12.0);
    CHECK(ops::avg(s).at("b") == 10.0);
    CHECK_THROWS_AS(ops::avg(s.slice(0, 0)), Error);
}

TEST_CASE("differences, sums and calculus") {
    const auto s = small();
    const auto d = ops::diff(s);
    REQUIRE(d.size() == 3);
    CHECK(d.at(0).start.epoch == 10.0);
    CHECK(d.at(0).data == std::vector<double>{2.0, 10.0});
    CHECK(d.at(1).data == std::vector<double>{-1.0, -20.0});
    const auto c = ops::csum(s);
    CHECK(c.at(-1).data == std::vector<double>{12.0, 40.0});
    const auto der = ops::derivative(s);
    CHECK(der.at(1).data == std::vector<double>{-1.0 / 10.0, -2.0});
    Rng rng(1);
    const auto irregular = random_points(rng, 10, 1, false);
    CHECK_THROWS_AS(ops::derivative(irregular), Error);
    CHECK_THROWS_AS(ops::integral(irregular), Error);
    const auto in = ops::integral(s);
    REQUIRE(in.size() == 4);
    CHECK(in.at(0).data == std::vector<double>{0.0, 0.0});
    CHECK(in.at(1).data[0] == 20.0);   // (1+3)/2*10
    CHECK(in.at(3).data[0] == 20.0 + 25.0 + 40.0);
    CHECK(d.labels() == s.labels());
}

TEST_CASE("csum inverts diff") {
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto s = random_points(rng, static_cast<std::size_t>(integer(rng, 3, 50)), 2, false);
        const auto c = ops::csum(ops::diff(s));
        for (std::size_t j = 0; j < c.size(); ++j) {
            for (std::size_t k = 0; k < 2; ++k) {
                CHECK(c.elements()[j].data[k] + s.elements()[0].data[k] ==
                      doctest::Approx(s.elements()[j + 1].data[k]).scale(1000.0));
            }
        }
    }
}

TEST_CASE("normalize, offset, rescale") {
    const auto s = small();
    const auto n = ops::normalize(s);
    CHECK(ops::min(n).at("a") == 0.0);
    CHECK(ops::max(n).at("a") == 1.0);
    CHECK(n.value(1, "a") == 0.4);
    CHECK(ops::offset(s, 1.5).value(0, "b") == 11.5);
    CHECK(ops::offset(s, ops::LabelValues{{"a", 1.0}, {"b", -1.0}}).value(0, "b") == 9.0);
    CHECK(ops::rescale(s, 2.0).value(3, "a") == 12.0);
    CHECK_THROWS_AS(ops::rescale(s, ops::LabelValues{{"a", 1.0}}), Error);
    CHECK_THROWS_AS(ops::offset(s, INFINITY), Error);
    auto builder = TimeSeries::Builder::points({"flat"});
    builder.append(Timestamp{0}, {1.0}).append(Timestamp{1}, {1.0});
    CHECK_THROWS_AS(ops::normalize(std::move(builder).build()), Error);
}

TEST_CASE("moving average") {
    const auto s = periodic_points(30, 7);
    const auto m = ops::mavg(s, 3);
    REQUIRE(m.size() == 28);
    CHECK(m.at(0).start == s.at(2).start);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double expected = (s.elements()[i].data[0] + s.elements()[i + 1].data[0] + s.elements()[i + 2].data[0]) / 3.0;
        CHECK(m.elements()[i].data[0] == doctest::Approx(expected));
    }
    CHECK_THROWS_AS(ops::mavg(s, 0), Error);
    CHECK_THROWS_AS(ops::mavg(s, 31), Error);
}

TEST_CASE("merge and filter") {
    auto a = periodic_points(10, 5, 3600.0, {"a"});
    auto b = periodic_points(12, 5, 3600.0, {"b"}, 1'546'300'800.0 - 3600.0);
    const auto m = ops::merge({a, b});
    CHECK(m.labels() == std::vector<std::string>{"a", "b"});
    CHECK(m.size() == 10);
    CHECK(m.at(0).start == a.at(0).start);
    CHECK(m.value(0, "b") == b.value(1, "b"));
    CHECK_THROWS_AS(ops::merge({a, a}), Error);
    CHECK_THROWS_AS(ops::merge({a, periodic_points(10, 5, 600.0, {"c"})}), Error);
    CHECK_THROWS_AS(ops::merge({a, periodic_points(10, 5, 3600.0, {"c"}).change_tz("Europe/Rome")}), Error);
    CHECK(ops::filter(m, {"b"}).labels() == std::vector<std::string>{"b"});
    CHECK_THROWS_AS(ops::filter(m, {}), Error);
    CHECK_THROWS_AS(ops::filter(m, {"zzz"}), Error);
}

TEST_CASE("merged data_loss is the maximum over inputs") {
    auto left = TimeSeries::Builder::points({"a"});
    auto right = TimeSeries::Builder::points({"b"});
    left.append(Timestamp{0}, {1.0}, DataIndexes{{"data_loss", 0.2}}).append(Timestamp{60}, {1.0});
    right.append(Timestamp{0}, {2.0}, DataIndexes{{"data_loss", 0.5}}).append(Timestamp{60}, {2.0}, DataIndexes{{"data_loss", 0.1}});
    const auto m = ops::merge({std::move(left).build(), std::move(right).build()});
    CHECK(m.at(0).indexes.get("data_loss") == 0.5);
    CHECK(m.at(1).indexes.get("data_loss") == 0.1);
}
