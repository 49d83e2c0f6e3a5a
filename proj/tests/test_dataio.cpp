#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <unistd.h>

#include "doctest.h"
#include "surv/pipeline.hpp"
#include "surv/split.hpp"
#include "test_util.hpp"

using namespace surv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("survkit_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string write_file(const TempDir& dir, const std::string& name, const std::string& body) {
    const std::string p = (dir.path / name).string();
    std::ofstream out(p);
    out << body;
    return p;
}

DatasetSpec demo_spec(const std::string& csv_path) {
    DatasetSpec spec;
    spec.name = "demo";
    spec.path = csv_path;
    spec.time_column = "time";
    spec.event_column = "status";
    spec.event_value = "1";
    spec.features = {{"age", FeatureKind::Continuous}, {"group", FeatureKind::Categorical}};
    spec.time_unit_length = 1.0;
    return spec;
}

}  // namespace

TEST_CASE("read_csv parses headers, quoting and row shape") {
    TempDir dir;
    const auto p = write_file(dir, "ok.csv",
                              "a,b,c\n1,\"x,y\",3\n4,\"he said \"\"hi\"\"\",6\n");
    const RawTable t = read_csv(p);
    REQUIRE(t.columns.size() == 3);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[1][1] == "he said \"hi\"");

    const auto bad = write_file(dir, "bad.csv", "a,b\n1,2,3\n");
    CHECK_THROWS_AS(read_csv(bad), ParseError);
    CHECK_THROWS_AS(read_csv((dir.path / "missing.csv").string()), InvalidInput);
}

TEST_CASE("load_csv extracts declared columns and flags missing cells") {
    TempDir dir;
    const auto p = write_file(dir, "d.csv",
                              "id,time,status,age,group\n"
                              "1,5,1,63,a\n"
                              "2,8,0,NA,b\n"
                              "3,2,1,41,NA\n");
    const FeatureTable t = load_csv(demo_spec(p), read_csv(p));
    REQUIRE(t.rows() == 3);
    CHECK(t.times == std::vector<double>{5, 8, 2});
    CHECK(t.events == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(!t.is_missing(0, 0));
    CHECK(t.is_missing(1, 0));
    CHECK(t.is_missing(2, 1));
}

TEST_CASE("load_csv schema and parse errors carry location") {
    TempDir dir;
    const auto no_event = write_file(dir, "no_event.csv", "time,age,group\n1,2,a\n");
    CHECK_THROWS_AS(load_csv(demo_spec(no_event), read_csv(no_event)), SchemaError);

    const auto bad_cell = write_file(dir, "bad_cell.csv",
                                     "time,status,age,group\n1,1,notanumber,a\n");
    try {
        load_csv(demo_spec(bad_cell), read_csv(bad_cell));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("age") != std::string::npos);
    }
}

TEST_CASE("load_csv applies row filter and derived time") {
    TempDir dir;
    DatasetSpec spec = demo_spec("");
    spec.filter = {{"etype"}, {"2"}};
    spec.time_origin_column = "start";
    spec.time_column = "stop";
    const auto p = write_file(dir, "f.csv",
                              "stop,start,status,age,group,etype\n"
                              "10,2,1,50,a,1\n"
                              "10,2,1,50,a,2\n"
                              "20,5,0,60,b,2\n");
    spec.path = p;
    const FeatureTable t = load_csv(spec, read_csv(p));
    REQUIRE(t.rows() == 2);
    CHECK(t.times == std::vector<double>{8, 15});
}

TEST_CASE("event_value matches numerically and as string") {
    TempDir dir;
    DatasetSpec spec = demo_spec("");
    spec.event_value = "D";
    const auto p = write_file(dir, "e.csv",
                              "time,status,age,group\n1,D,3,a\n2,A,4,b\n");
    spec.path = p;
    const FeatureTable t = load_csv(spec, read_csv(p));
    CHECK(t.events == std::vector<std::uint8_t>{1, 0});

    DatasetSpec numeric = demo_spec("");
    numeric.event_value = "1";
    const auto q = write_file(dir, "n.csv",
                              "time,status,age,group\n1,1.0,3,a\n2,0.0,4,b\n");
    numeric.path = q;
    CHECK(load_csv(numeric, read_csv(q)).events == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("drop_sparse_features uses a strict threshold") {
    FeatureTable t;
    t.features = {{"mostly_missing", FeatureKind::Continuous},
                  {"exactly_20", FeatureKind::Continuous},
                  {"complete", FeatureKind::Continuous}};
    for (int r = 0; r < 20; ++r) {
        t.times.push_back(r + 1.0);
        t.events.push_back(1);
        t.cells.push_back({"1", "1", "1"});
        // 25% missing, exactly 20% missing, 0% missing
        t.missing.push_back(r < 5 ? 1 : 0);
        t.missing.push_back(r < 4 ? 1 : 0);
        t.missing.push_back(0);
    }
    std::vector<DroppedFeature> dropped;
    const FeatureTable kept = drop_sparse_features(t, 0.20, &dropped);
    REQUIRE(dropped.size() == 1);
    CHECK(dropped[0].name == "mostly_missing");
    CHECK(dropped[0].missing_fraction == doctest::Approx(0.25));
    REQUIRE(kept.features.size() == 2);
    CHECK(kept.features[0].name == "exactly_20");  // boundary retained
    CHECK_THROWS_AS(drop_sparse_features(t, 0.0), InvalidInput);
}

TEST_CASE("impute fills medians and modes from the fit rows") {
    FeatureTable t;
    t.features = {{"num", FeatureKind::Continuous}, {"cat", FeatureKind::Categorical}};
    auto add_row = [&](const std::string& num, const std::string& cat) {
        t.times.push_back(1.0);
        t.events.push_back(1);
        t.cells.push_back({num, cat});
        t.missing.push_back(num.empty() ? 1 : 0);
        t.missing.push_back(cat.empty() ? 1 : 0);
    };
    add_row("1", "a");
    add_row("3", "a");
    add_row("", "b");
    add_row("7", "");

    const std::vector<std::size_t> all{0, 1, 2, 3};
    const ImputeModel model = fit_impute(t, all);
    CHECK(model.medians[0] == doctest::Approx(3.0));  // median of {1,3,7}
    CHECK(model.modes[1] == "a");

    const FeatureTable filled = impute(t, model);
    CHECK(filled.cell(2, 0) == "3");
    CHECK(filled.cell(3, 1) == "a");
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t f = 0; f < 2; ++f) CHECK(!filled.is_missing(r, f));

    // median of an even count averages the middle pair
    const ImputeModel two = fit_impute(t, {0, 1});
    CHECK(two.medians[0] == doctest::Approx(2.0));

    // a complete table passes through unchanged
    const FeatureTable same = impute(filled, fit_impute(filled, all));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t f = 0; f < 2; ++f) CHECK(same.cell(r, f) == filled.cell(r, f));
}

TEST_CASE("impute rejects an all-missing feature") {
    FeatureTable t;
    t.features = {{"void", FeatureKind::Continuous}};
    t.times = {1.0};
    t.events = {1};
    t.cells = {{""}};
    t.missing = {1};
    CHECK_THROWS_AS(fit_impute(t, {0}), InvalidInput);
}

TEST_CASE("encode one-hot expands and unit-scales with clipping") {
    FeatureTable t;
    t.features = {{"num", FeatureKind::Continuous}, {"cat", FeatureKind::Categorical}};
    auto add_row = [&](const std::string& num, const std::string& cat) {
        t.times.push_back(1.0);
        t.events.push_back(1);
        t.cells.push_back({num, cat});
        t.missing.push_back(0);
        t.missing.push_back(0);
    };
    add_row("0", "red");
    add_row("5", "green");
    add_row("10", "blue");
    add_row("12", "violet");  // held-out row: out of range + unseen level

    const std::vector<std::size_t> fit_rows{0, 1, 2};
    const EncodeModel model = fit_encode(t, fit_rows);
    REQUIRE(model.encoded_names.size() == 4);  // num + 3 indicators
    CHECK(model.encoded_names[0] == "num");
    CHECK(model.encoded_is_indicator[0] == 0);
    CHECK(model.encoded_is_indicator[1] == 1);

    const Eigen::MatrixXd X = encode(t, model, {0, 1, 2, 3});
    CHECK(X(0, 0) == 0.0);
    CHECK(X(1, 0) == 0.5);
    CHECK(X(2, 0) == 1.0);
    CHECK(X(3, 0) == 1.0);  // 12 clipped into the training range
    // categories sorted: blue, green, red
    CHECK(X(0, 3) == 1.0);
    CHECK(X(1, 2) == 1.0);
    CHECK(X(2, 1) == 1.0);
    CHECK(X.row(3).tail(3).sum() == 0.0);  // unseen level -> zero block
    CHECK(X.minCoeff() >= 0.0);
    CHECK(X.maxCoeff() <= 1.0);
}

TEST_CASE("encode flags constant continuous columns") {
    FeatureTable t;
    t.features = {{"flat", FeatureKind::Continuous}};
    for (int r = 0; r < 3; ++r) {
        t.times.push_back(1.0);
        t.events.push_back(1);
        t.cells.push_back({"4"});
        t.missing.push_back(0);
    }
    const EncodeModel model = fit_encode(t, {0, 1, 2});
    REQUIRE(model.warnings.size() == 1);
    const Eigen::MatrixXd X = encode(t, model, {0, 1, 2});
    CHECK(X.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encode entries stay within [0,1] (property)") {
    auto rng = make_rng(4, 0xE2C);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    FeatureTable t;
    t.features = {{"a", FeatureKind::Continuous}, {"b", FeatureKind::Continuous}};
    for (int r = 0; r < 200; ++r) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", u(rng));
        std::string a = buf;
        std::snprintf(buf, sizeof(buf), "%.6f", u(rng));
        t.cells.push_back({a, buf});
        t.times.push_back(1.0);
        t.events.push_back(1);
        t.missing.push_back(0);
        t.missing.push_back(0);
    }
    std::vector<std::size_t> fit_rows;
    for (std::size_t r = 0; r < 60; ++r) fit_rows.push_back(r);  // test rows go out of range
    std::vector<std::size_t> all(200);
    std::iota(all.begin(), all.end(), 0);
    const Eigen::MatrixXd X = encode(t, fit_encode(t, fit_rows), all);
    CHECK(X.minCoeff() >= 0.0);
    CHECK(X.maxCoeff() <= 1.0);
}

TEST_CASE("stratified_split validates fractions") {
    CHECK_THROWS_AS(stratified_split({0, 1}, {1, 1}, {{0.5, 0.2, 0.2}}, 1), InvalidInput);
    CHECK_THROWS_AS(stratified_split({0, 1}, {1, 1}, {{1.0, -0.05, 0.05}}, 1), InvalidInput);
    CHECK_THROWS_AS(stratified_split({0}, {1, 1}, {{0.6, 0.2, 0.2}}, 1), InvalidInput);
}

TEST_CASE("stratified_split partitions exactly and deterministically") {
    auto ds = testutil::random_dataset(7, 500, 1);
    const auto a = stratified_split(ds, {0.6, 0.2, 0.2}, 42);
    const auto b = stratified_split(ds, {0.6, 0.2, 0.2}, 42);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);

    const auto c = stratified_split(ds, {0.6, 0.2, 0.2}, 43);
    CHECK(a.train != c.train);

    std::set<std::size_t> seen;
    for (const auto* part : {&a.train, &a.validation, &a.test})
        for (auto i : *part) CHECK(seen.insert(i).second);  // no overlaps
    CHECK(seen.size() == ds.size());
}

TEST_CASE("stratified_split preserves censoring and per-bin proportions") {
    const std::size_t n = 2000;
    auto rng = make_rng(3, 0x5B17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> bins(n);
    std::vector<std::uint8_t> events(n);
    for (std::size_t i = 0; i < n; ++i) {
        bins[i] = static_cast<int>(std::floor(u(rng) * 14.0));
        events[i] = u(rng) < 0.275 ? 1 : 0;
    }
    double censored = 0;
    for (auto e : events) censored += e == 0;
    const double pct = 100.0 * censored / static_cast<double>(n);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto split = stratified_split(bins, events, {0.6, 0.2, 0.2}, seed);
        for (const auto* part : {&split.train, &split.validation, &split.test}) {
            double c = 0;
            for (auto i : *part) c += events[i] == 0;
            const double part_pct = 100.0 * c / static_cast<double>(part->size());
            CHECK(std::abs(part_pct - pct) < 1.0);
        }
    }
}

TEST_CASE("stratified_split allocates 8 uniform records as 4/2/2") {
    // one (bin, event) cell per pair of records, fractions 1/2, 1/4, 1/4
    std::vector<int> bins{0, 0, 1, 1, 2, 2, 3, 3};
    std::vector<std::uint8_t> events{1, 1, 1, 1, 1, 1, 1, 1};
    const auto split = stratified_split(bins, events, {{0.5, 0.25, 0.25}}, 5);
    CHECK(split.train.size() == 4);
    CHECK(split.validation.size() == 2);
    CHECK(split.test.size() == 2);
}

TEST_CASE("stratified_split records merged cells") {
    // bin 9 holds a single event record: merged into the nearest event bin
    std::vector<int> bins{0, 0, 0, 0, 0, 0, 9};
    std::vector<std::uint8_t> events{1, 1, 1, 1, 1, 1, 1};
    const auto split = stratified_split(bins, events, {{0.6, 0.2, 0.2}}, 1);
    REQUIRE(split.merged_cells.size() == 1);
    CHECK(split.merged_cells[0].find("bin=9") != std::string::npos);
}
