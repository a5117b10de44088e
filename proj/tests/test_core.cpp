#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "tasksense/core.hpp"

using namespace tasksense;

TEST_CASE("task labels round-trip through text", "[core]") {
  for (TaskLabel l : kAllTasks) {
    CHECK(parse_task_label(to_string(l)) == l);
  }
  CHECK(parse_task_label("ScionCutting") == TaskLabel::ScionCutting);
  CHECK(parse_task_label("rootstock clipping") == TaskLabel::RootstockClipping);
  CHECK(parse_task_label("  Joining ") == TaskLabel::Joining);
  CHECK_FALSE(try_parse_task_label("Grafting").has_value());
  CHECK_THROWS_AS(parse_task_label("Grafting"), Error);
}

TEST_CASE("channel schema validates and indexes", "[core]") {
  ChannelSchema s({"RING3.Z", "INDEX1.Z"});
  CHECK(s.size() == 2);
  CHECK(s.index_of("INDEX1.Z") == 1);
  CHECK_FALSE(s.index_of("MIDDLE1.X").has_value());
  CHECK(s.name(0) == "RING3.Z");

  CHECK_THROWS_AS(ChannelSchema(std::vector<ChannelId>{}), Error);
  CHECK_THROWS_AS(ChannelSchema({"a", "a"}), Error);
  CHECK_THROWS_AS(ChannelSchema({"a", ""}), Error);
}

TEST_CASE("ndjson frame parsing", "[core]") {
  ChannelSchema schema({"a", "b"});

  SECTION("labeled record") {
    auto s = parse_labeled_record(
        R"({"ts": 40, "channels": {"a": 1.5, "b": -2.0}, "label": "Joining"})",
        schema);
    CHECK(s.frame.ts == 40);
    CHECK(s.frame.values == std::vector<double>{1.5, -2.0});
    CHECK(s.label == TaskLabel::Joining);
    CHECK(s.provenance == Provenance::Historical);
  }

  SECTION("extra channels are ignored") {
    auto f = parse_frame(
        R"({"ts": 0, "channels": {"a": 1, "b": 2, "c": 99}})", schema);
    CHECK(f.values == std::vector<double>{1.0, 2.0});
  }

  SECTION("missing channel is an error") {
    CHECK_THROWS_MATCHES(
        parse_frame(R"({"ts": 0, "channels": {"a": 1}})", schema), Error,
        Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == errc::missing_channel; }));
  }

  SECTION("malformed json / shape errors") {
    CHECK_THROWS_AS(parse_frame("{", schema), Error);
    CHECK_THROWS_AS(parse_frame(R"({"channels": {"a":1,"b":2}})", schema), Error);
    CHECK_THROWS_AS(
        parse_frame(R"({"ts": -1, "channels": {"a":1,"b":2}})", schema), Error);
    CHECK_THROWS_AS(
        parse_frame(R"({"ts": 1.5, "channels": {"a":1,"b":2}})", schema), Error);
  }

  SECTION("non-finite values rejected") {
    CHECK_THROWS_MATCHES(
        parse_frame(R"({"ts": 0, "channels": {"a": 1e999, "b": 0}})", schema),
        Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
          return e.code() == errc::malformed_line ||
                 e.code() == errc::non_finite_value;
        }));
  }

  SECTION("record without label rejected by parse_labeled_record") {
    CHECK_THROWS_AS(
        parse_labeled_record(R"({"ts":0,"channels":{"a":1,"b":2}})", schema),
        Error);
  }
}

TEST_CASE("csv frame parsing", "[core]") {
  ChannelSchema schema({"a", "b"});
  auto s = parse_labeled_record("20,0.5,1.25,Scion Cutting", schema);
  CHECK(s.frame.ts == 20);
  CHECK(s.frame.values == std::vector<double>{0.5, 1.25});
  CHECK(s.label == TaskLabel::ScionCutting);

  auto f = parse_frame("0,1,2", schema);
  CHECK(f.values == std::vector<double>{1.0, 2.0});

  CHECK_THROWS_AS(parse_frame("0,1", schema), Error);
  CHECK_THROWS_AS(parse_frame("0,1,2,3,4", schema), Error);
  CHECK_THROWS_AS(parse_frame("x,1,2", schema), Error);
  CHECK_THROWS_AS(parse_frame("-5,1,2", schema), Error);

  CHECK(parse_csv_header("ts,a,b,label", schema));
  CHECK_FALSE(parse_csv_header("ts,a,b", schema));
  CHECK_THROWS_AS(parse_csv_header("ts,a,c", schema), Error);
  CHECK(csv_header(schema, true) == "ts,a,b,label");
}

TEST_CASE("ndjson serialization round-trips", "[core]") {
  ChannelSchema schema({"RING3.Z", "MIDDLE1.X"});
  SensorFrame f{120, {1.1669999999999998, -2.062}};
  const std::string line = to_ndjson(f, schema, TaskLabel::RootstockCutting);
  auto back = parse_labeled_record(line, schema);
  CHECK(back.frame == f);  // shortest-round-trip doubles are exact
  CHECK(back.label == TaskLabel::RootstockCutting);
}

TEST_CASE("dataset eviction protects historical samples", "[core]") {
  ChannelSchema schema({"a"});
  auto hist = [&](double v) {
    return LabeledSample{{0, {v}}, TaskLabel::Joining, Provenance::Historical};
  };
  auto pseudo = [&](double v) {
    return LabeledSample{{0, {v}}, TaskLabel::Joining, Provenance::PseudoLabeled};
  };

  SECTION("oldest pseudo-labeled goes first") {
    Dataset ds(schema, 3);
    CHECK(ds.push(pseudo(1)));
    CHECK(ds.push(hist(2)));
    CHECK(ds.push(pseudo(3)));
    CHECK(ds.push(hist(4)));  // evicts pseudo(1)
    REQUIRE(ds.size() == 3);
    CHECK(ds[0].frame.values[0] == 2.0);
    CHECK(ds.count(Provenance::Historical) == 2);
    CHECK(ds.count(Provenance::PseudoLabeled) == 1);
  }

  SECTION("pseudo-labeled push into all-historical full set drops itself") {
    Dataset ds(schema, 2);
    ds.push(hist(1));
    ds.push(hist(2));
    CHECK_FALSE(ds.push(pseudo(3)));
    CHECK(ds.size() == 2);
    CHECK(ds.count(Provenance::PseudoLabeled) == 0);
  }

  SECTION("historical push into all-historical full set is an error") {
    Dataset ds(schema, 2);
    ds.push(hist(1));
    ds.push(hist(2));
    CHECK_THROWS_MATCHES(ds.push(hist(3)), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == errc::dataset_full;
                         }));
    CHECK(ds.size() == 2);
  }

  SECTION("schema width is enforced") {
    Dataset ds(schema, 4);
    CHECK_THROWS_AS(
        ds.push(LabeledSample{{0, {1.0, 2.0}}, TaskLabel::Joining,
                              Provenance::Historical}),
        Error);
  }
}

TEST_CASE("read_dataset consumes ndjson and headered csv", "[core]") {
  ChannelSchema schema({"a", "b"});

  SECTION("ndjson") {
    std::istringstream in(
        "{\"ts\":0,\"channels\":{\"a\":1,\"b\":2},\"label\":\"Joining\"}\n"
        "\n"
        "{\"ts\":2,\"channels\":{\"a\":3,\"b\":4},\"label\":\"Scion Cutting\"}\n");
    auto ds = read_dataset(in, schema);
    REQUIRE(ds.size() == 2);
    CHECK(ds[1].label == TaskLabel::ScionCutting);
  }

  SECTION("csv with header") {
    std::istringstream in(
        "ts,a,b,label\n"
        "0,1,2,Joining\n"
        "2,3,4,Rootstock Cutting\n");
    auto ds = read_dataset(in, schema);
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].label == TaskLabel::Joining);
  }

  SECTION("parse failures carry the line number") {
    std::istringstream in(
        "{\"ts\":0,\"channels\":{\"a\":1,\"b\":2},\"label\":\"Joining\"}\n"
        "{\"ts\":1,\"channels\":{\"a\":1},\"label\":\"Joining\"}\n");
    try {
      read_dataset(in, schema);
      FAIL("expected Error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SECTION("empty input is an error") {
    std::istringstream in("");
    CHECK_THROWS_MATCHES(read_dataset(in, schema), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == errc::empty_dataset;
                         }));
  }
}
