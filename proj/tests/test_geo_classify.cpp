#include <chrono>
#include <filesystem>
#include <sstream>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "fake_server.hpp"
#include "solsent/backend.hpp"
#include "solsent/classify.hpp"
#include "solsent/geolocate.hpp"

namespace fs = std::filesystem;
using namespace solsent;

namespace {

const fs::path kDemo = fs::path(SOLSENT_SOURCE_DIR) / "data" / "demo";

const geo::Gazetteer& gaz() {
  static const auto g = geo::load_gazetteer(kDemo);
  return g;
}

std::vector<classify::AnnotatedExample> numbered(std::size_t n) {
  std::vector<classify::AnnotatedExample> v;
  for (std::size_t i = 0; i < n; ++i) {
    v.push_back({"item " + std::to_string(i), i % 2 ? classify::Label::positive : classify::Label::negative});
  }
  return v;
}

std::vector<textprep::NormalizedText> texts(std::size_t n) {
  std::vector<textprep::NormalizedText> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back({i % 2 ? "solar good" : "solar meh", "p" + std::to_string(i)});
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// geolocate

TEST(Geolocate, CoordinatesWinOverProfile) {
  auto r = geo::resolve(std::string("Seattle, WA"), ingest::GeoPoint{25.76, -80.19}, gaz());
  EXPECT_EQ(r.outcome_str(), "FL");
  EXPECT_EQ(r.method, geo::Method::coordinates);
}

TEST(Geolocate, ProfileMethods) {
  auto a = geo::resolve_profile("Texas", gaz());
  EXPECT_EQ(a.outcome_str(), "TX");
  EXPECT_EQ(a.method, geo::Method::profile_exact);
  auto b = geo::resolve_profile("Houston", gaz());
  EXPECT_EQ(b.outcome_str(), "TX");
  EXPECT_EQ(b.method, geo::Method::profile_city);
  EXPECT_EQ(geo::resolve_profile("Toronto, Canada", gaz()).outcome_str(), "non_us");
  EXPECT_EQ(geo::resolve_profile("the moon", gaz()).outcome_str(), "unknown");
  EXPECT_FALSE(geo::resolve(std::nullopt, std::nullopt, gaz()).resolved());
}

TEST(Geolocate, OceanPointIsNotUs) {
  EXPECT_EQ(geo::resolve_coordinates(51.5, -0.12, gaz()).outcome_str(), "non_us");
  EXPECT_EQ(geo::resolve_coordinates(-33.9, 151.2, gaz()).outcome_str(), "non_us");
}

TEST(Geolocate, GreatCircle) {
  // New York to Los Angeles, about 3936 km
  EXPECT_NEAR(geo::great_circle_km(40.7128, -74.0060, 34.0522, -118.2437), 3936.0, 10.0);
  EXPECT_DOUBLE_EQ(geo::great_circle_km(10, 20, 10, 20), 0.0);
}

TEST(Geolocate, StateCodeRoundTrip) {
  for (auto s : geo::StateCode::all()) {
    auto back = geo::StateCode::parse(s.code());
    ASSERT_TRUE(back);
    EXPECT_EQ(*back, s);
  }
  EXPECT_FALSE(geo::StateCode::parse("PR"));
  EXPECT_EQ(geo::StateCode::parse("dc")->name(), "District of Columbia");
}

// ---------------------------------------------------------------------------
// classify

TEST(Classify, SplitSizes) {
  classify::SplitSpec spec;
  auto s = classify::split(numbered(5122), spec);
  EXPECT_EQ(s.train.size(), 4097u);
  EXPECT_EQ(s.dev.size(), 512u);
  EXPECT_EQ(s.test.size(), 513u);
  auto t = classify::split(numbered(10), spec);
  EXPECT_EQ(t.train.size(), 8u);
  EXPECT_EQ(t.dev.size(), 1u);
  EXPECT_EQ(t.test.size(), 1u);
  EXPECT_THROW(classify::split(numbered(9), spec), InputError);
}

TEST(Classify, SplitIsDeterministicPartition) {
  classify::SplitSpec spec;
  spec.seed = 7;
  auto a = classify::split(numbered(300), spec);
  auto b = classify::split(numbered(300), spec);
  EXPECT_EQ(a.train_idx, b.train_idx);
  EXPECT_EQ(a.test_idx, b.test_idx);
  std::vector<int> seen(300, 0);
  for (auto* v : {&a.train_idx, &a.dev_idx, &a.test_idx}) {
    for (auto i : *v) ++seen[i];
  }
  for (int c : seen) EXPECT_EQ(c, 1);
  spec.seed = 8;
  EXPECT_NE(classify::split(numbered(300), spec).train_idx, a.train_idx);
}

TEST(Classify, AnnotationsDropNeutralAndRejectUnknown) {
  std::istringstream ok("text\tlabel\ngood\tpositive\nbad\tnegative\nmeh\tneutral\n");
  auto r = classify::parse_annotations(ok, "mem");
  EXPECT_EQ(r.examples.size(), 2u);
  EXPECT_EQ(r.n_neutral_dropped, 1u);
  std::istringstream bad("text\tlabel\ngood\tthumbs-up\n");
  EXPECT_THROW(classify::parse_annotations(bad, "mem"), InputError);
}

TEST(Classify, MetricsFromCounts) {
  auto m = classify::metrics_from_counts(8, 2, 1, 9);
  EXPECT_DOUBLE_EQ(m.accuracy, 17.0 / 20.0);
  EXPECT_DOUBLE_EQ(m.precision, 0.8);
  EXPECT_DOUBLE_EQ(m.recall, 8.0 / 9.0);
  EXPECT_NEAR(m.f1, 2 * 0.8 * (8.0 / 9.0) / (0.8 + 8.0 / 9.0), 1e-15);
}

TEST(Classify, ThresholdAtHalf) {
  EXPECT_EQ(classify::label_for(0.5), classify::Label::positive);
  EXPECT_EQ(classify::label_for(0.4999), classify::Label::negative);
}

TEST(Classify, ModelJsonRoundTrip) {
  std::vector<classify::AnnotatedExample> data;
  for (int i = 0; i < 60; ++i) {
    data.push_back({i % 2 ? "love solar great" : "hate solar awful",
                    i % 2 ? classify::Label::positive : classify::Label::negative});
  }
  auto s = classify::split(data, {});
  auto m = classify::train_baseline(s.train, s.dev);
  auto back = classify::BaselineModel::from_json(m.to_json());
  EXPECT_EQ(back.to_json().dump(), m.to_json().dump());
  EXPECT_GT(back.predict("love solar"), 0.5);
  EXPECT_LT(back.predict("awful solar"), 0.5);
}

// ---------------------------------------------------------------------------
// wire protocol over a child process

namespace {

std::unique_ptr<classify::ExternalBackend> spawn(const std::string& mode, int timeout_ms = 2000) {
  return classify::ExternalBackend::spawn(std::string(FAKE_BACKEND) + " " + mode,
                                          std::chrono::milliseconds(timeout_ms));
}

std::string failing_id(const std::string& mode, std::size_t n = 5) {
  auto b = spawn(mode);
  auto t = texts(n);
  try {
    b->score(t);
  } catch (const ProtocolError& e) {
    return e.failing_id();
  }
  return "<no error>";
}

}  // namespace

TEST(Protocol, HappyPathAnyOrder) {
  auto b = spawn("reverse");
  EXPECT_EQ(b->id(), "fake-reverse");
  auto t = texts(7);
  auto p = b->score(t);
  ASSERT_EQ(p.size(), 7u);
  for (double v : p) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Protocol, ManyBatchesOnOneConnection) {
  auto b = spawn("keyword:good");
  auto t = texts(1000);
  auto p = b->score(t);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p[i], i % 2 ? 1.0 : 0.0);
  auto again = b->score(t);
  EXPECT_EQ(again, p);
}

TEST(Protocol, FailuresNameTheItem) {
  EXPECT_EQ(failing_id("bad-json"), "p0");
  EXPECT_EQ(failing_id("unknown-id"), "zzz-p0");
  EXPECT_EQ(failing_id("missing"), "p4");
  EXPECT_EQ(failing_id("duplicate"), "p0");
  EXPECT_EQ(failing_id("range"), "p0");
}

TEST(Protocol, HangupMidBatchFails) {
  auto b = spawn("no-end");
  auto t = texts(3);
  EXPECT_THROW(b->score(t), ProtocolError);
}

TEST(Protocol, BadHandshake) { EXPECT_THROW(spawn("handshake"), ProtocolError); }

TEST(Protocol, Timeout) {
  auto b = spawn("slow", 300);
  auto t = texts(2);
  auto t0 = std::chrono::steady_clock::now();
  try {
    b->score(t);
    FAIL() << "expected a timeout";
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.failing_id(), "p0");
  }
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(2));
}

TEST(Protocol, DuplicateIdsRejectedBeforeSending) {
  auto b = spawn("ones");
  std::vector<textprep::NormalizedText> t = {{"a", "x"}, {"b", "x"}};
  EXPECT_THROW(b->score(t), InputError);
}

// ---------------------------------------------------------------------------
// wire protocol over TCP

TEST(Protocol, TcpSession) {
  int ls = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(ls, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ASSERT_EQ(::bind(ls, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(::listen(ls, 1), 0);
  socklen_t len = sizeof addr;
  ::getsockname(ls, reinterpret_cast<sockaddr*>(&addr), &len);
  int port = ntohs(addr.sin_port);

  std::thread server([ls] {
    int fd = ::accept(ls, nullptr, nullptr);
    std::string buf;
    auto read = [&](std::string& line) {
      for (;;) {
        auto nl = buf.find('\n');
        if (nl != std::string::npos) {
          line = buf.substr(0, nl);
          buf.erase(0, nl + 1);
          return true;
        }
        char tmp[4096];
        auto n = ::recv(fd, tmp, sizeof tmp, 0);
        if (n <= 0) return false;
        buf.append(tmp, static_cast<std::size_t>(n));
      }
    };
    auto send = [&](const std::string& line) {
      std::string l = line + "\n";
      ::send(fd, l.data(), l.size(), MSG_NOSIGNAL);
    };
    fake::serve(fake::Script{"keyword:good"}, read, send);
    ::close(fd);
  });

  {
    auto b = classify::ExternalBackend::connect("127.0.0.1:" + std::to_string(port), std::chrono::seconds(5));
    EXPECT_EQ(b->id(), "fake-keyword:good");
    auto t = texts(600);
    auto p = b->score(t);
    ASSERT_EQ(p.size(), 600u);
    EXPECT_DOUBLE_EQ(p[0], 0.0);
    EXPECT_DOUBLE_EQ(p[1], 1.0);
  }
  server.join();
  ::close(ls);
}

TEST(Protocol, BadAddress) {
  EXPECT_THROW(classify::ExternalBackend::connect("no-port-here"), InputError);
}
