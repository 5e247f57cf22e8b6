#include <nacabe/core/forwarder.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace nacabe;

namespace {

struct Fixture {
  Scheduler sched;
  RngPtr rng = std::make_shared<Rng>(Rng::seeded(8001));
  Forwarder fwd{sched, rng};
};

Data
makeData(const Name& name, std::string_view payload, uint64_t freshnessMs = 10000)
{
  Data d;
  d.name = name;
  d.content = toBytes(payload);
  d.freshnessPeriodMs = freshnessMs;
  d.keyLocator = Name::fromUri("/k");
  d.signature = Bytes(64, 0);
  return d;
}

} // namespace

TEST_CASE("producer answers a registered prefix")
{
  Fixture f;
  Face& producer = f.fwd.createFace();
  Face& consumer = f.fwd.createFace();

  int handlerCalls = 0;
  producer.registerPrefix(Name::fromUri("/org/mhealth"), [&](const Interest& i) {
    ++handlerCalls;
    producer.put(makeData(i.name, "hello"));
  });

  bool gotData = false;
  bool gotTimeout = false;
  consumer.expressInterest(Interest{Name::fromUri("/org/mhealth/x")},
                           [&](const Data& d) {
                             gotData = true;
                             CHECK(toString(d.content) == "hello");
                           },
                           [&] { gotTimeout = true; });
  f.sched.runUntilIdle();
  CHECK(handlerCalls == 1);
  CHECK(gotData);
  CHECK_FALSE(gotTimeout);
}

TEST_CASE("unregistered name times out after the lifetime")
{
  Fixture f;
  Face& consumer = f.fwd.createFace();
  bool gotTimeout = false;
  Interest i{Name::fromUri("/nowhere")};
  i.lifetimeMs = 1000;
  consumer.expressInterest(i, [](const Data&) { FAIL("unexpected data"); },
                           [&] { gotTimeout = true; });
  f.sched.runUntilIdle();
  CHECK(gotTimeout);
  CHECK(f.sched.nowMs() >= 1000);
}

TEST_CASE("exact interest below a registered prefix is not routed")
{
  Fixture f;
  Face& producer = f.fwd.createFace();
  Face& consumer = f.fwd.createFace();
  producer.registerPrefix(Name::fromUri("/a/b"),
                          [&](const Interest& i) { producer.put(makeData(i.name, "x")); });
  bool gotTimeout = false;
  Interest i{Name::fromUri("/a")};
  i.canBePrefix = false;
  i.lifetimeMs = 500;
  consumer.expressInterest(i, [](const Data&) { FAIL("unexpected data"); },
                           [&] { gotTimeout = true; });
  f.sched.runUntilIdle();
  CHECK(gotTimeout);
}

TEST_CASE("second identical interest is served from the content store")
{
  Fixture f;
  Face& producer = f.fwd.createFace();
  Face& consumer = f.fwd.createFace();
  int handlerCalls = 0;
  producer.registerPrefix(Name::fromUri("/p"), [&](const Interest& i) {
    ++handlerCalls;
    producer.put(makeData(i.name, "v"));
  });

  int received = 0;
  Interest i{Name::fromUri("/p/item")};
  i.mustBeFresh = false;
  consumer.expressInterest(i, [&](const Data&) { ++received; }, [] {});
  f.sched.runUntilIdle();
  consumer.expressInterest(i, [&](const Data&) { ++received; }, [] {});
  f.sched.runUntilIdle();

  CHECK(received == 2);
  CHECK(handlerCalls == 1); // second answer came from the CS
  CHECK(f.fwd.counters().csHits == 1);
}

TEST_CASE("longest prefix match routes to the most specific face")
{
  Fixture f;
  Face& faceA = f.fwd.createFace();
  Face& faceAB = f.fwd.createFace();
  Face& consumer = f.fwd.createFace();

  int aCalls = 0, abCalls = 0;
  faceA.registerPrefix(Name::fromUri("/a"), [&](const Interest& i) {
    ++aCalls;
    faceA.put(makeData(i.name, "from-a"));
  });
  faceAB.registerPrefix(Name::fromUri("/a/b"), [&](const Interest& i) {
    ++abCalls;
    faceAB.put(makeData(i.name, "from-ab"));
  });

  std::string got;
  consumer.expressInterest(Interest{Name::fromUri("/a/b/c")},
                           [&](const Data& d) { got = toString(d.content); }, [] {});
  f.sched.runUntilIdle();
  CHECK(got == "from-ab");
  CHECK(aCalls == 0);
  CHECK(abCalls == 1);
}

TEST_CASE("longest prefix match agrees with a brute-force oracle")
{
  Fixture f;
  Rng rng = Rng::seeded(8002);
  std::vector<Name> prefixes;
  std::vector<Face*> faces;
  std::vector<int> calls;
  // a small random prefix forest
  for (int i = 0; i < 12; ++i) {
    Name p;
    size_t depth = 1 + rng.nextBelow(3);
    for (size_t d = 0; d < depth; ++d)
      p.append("n" + std::to_string(rng.nextBelow(3)));
    if (std::find(prefixes.begin(), prefixes.end(), p) != prefixes.end())
      continue;
    Face& face = f.fwd.createFace();
    size_t idx = prefixes.size();
    prefixes.push_back(p);
    faces.push_back(&face);
    calls.push_back(0);
    face.registerPrefix(p, [&, idx](const Interest& i) {
      ++calls[idx];
      faces[idx]->put(makeData(i.name, "r" + std::to_string(idx)));
    });
  }
  Face& consumer = f.fwd.createFace();

  for (int trial = 0; trial < 60; ++trial) {
    Name name;
    size_t depth = 1 + rng.nextBelow(4);
    for (size_t d = 0; d < depth; ++d)
      name.append("n" + std::to_string(rng.nextBelow(3)));

    // oracle: longest registered prefix of name
    int best = -1;
    for (size_t i = 0; i < prefixes.size(); ++i) {
      if (prefixes[i].isPrefixOf(name) &&
          (best < 0 || prefixes[i].size() > prefixes[static_cast<size_t>(best)].size()))
        best = static_cast<int>(i);
    }

    std::fill(calls.begin(), calls.end(), 0);
    f.fwd.contentStore().clear();
    std::string got;
    bool timedOut = false;
    Interest i{name};
    i.lifetimeMs = 100;
    consumer.expressInterest(i, [&](const Data& d) { got = toString(d.content); },
                             [&] { timedOut = true; });
    f.sched.runUntilIdle();

    if (best < 0) {
      REQUIRE(timedOut);
    }
    else {
      REQUIRE(got == "r" + std::to_string(best));
      for (size_t i2 = 0; i2 < calls.size(); ++i2)
        REQUIRE(calls[i2] == (static_cast<int>(i2) == best ? 1 : 0));
    }
  }
}

TEST_CASE("one data satisfies all pending interests, later data is dropped")
{
  Fixture f;
  Face& producer = f.fwd.createFace();
  std::vector<Interest> seen;
  producer.registerPrefix(Name::fromUri("/p"),
                          [&](const Interest& i) { seen.push_back(i); });

  constexpr int N = 5;
  int received = 0;
  std::vector<Face*> consumers;
  for (int i = 0; i < N; ++i) {
    Face& c = f.fwd.createFace();
    consumers.push_back(&c);
    c.expressInterest(Interest{Name::fromUri("/p/x")},
                      [&](const Data&) { ++received; }, [] {});
  }
  // flush deliveries without letting the interest lifetimes expire
  f.sched.runUntil(f.sched.nowMs() + 10);
  REQUIRE_FALSE(seen.empty());

  producer.put(makeData(Name::fromUri("/p/x"), "once"));
  f.sched.runUntil(f.sched.nowMs() + 10);
  CHECK(received == N);

  // same data again without a new interest: dropped as unsolicited
  auto before = f.fwd.counters().unsolicitedData;
  producer.put(makeData(Name::fromUri("/p/x"), "again"));
  f.sched.runUntil(f.sched.nowMs() + 10);
  CHECK(received == N);
  CHECK(f.fwd.counters().unsolicitedData == before + 1);
  f.sched.runUntilIdle();
}

TEST_CASE("mustBeFresh never serves a stale cached data")
{
  Fixture f;
  Face& producer = f.fwd.createFace();
  Face& consumer = f.fwd.createFace();
  int handlerCalls = 0;
  producer.registerPrefix(Name::fromUri("/p"), [&](const Interest& i) {
    ++handlerCalls;
    if (handlerCalls == 1)
      producer.put(makeData(i.name, "fresh", 1000));
    // second interest: stay silent so a stale CS answer would be visible
  });

  Interest i{Name::fromUri("/p/x")};
  i.mustBeFresh = true;
  i.lifetimeMs = 500;
  int received = 0;
  consumer.expressInterest(i, [&](const Data&) { ++received; }, [] {});
  f.sched.runUntilIdle();
  CHECK(received == 1);

  // let the cached copy age beyond its freshness period
  f.sched.runUntil(f.sched.nowMs() + 2000);

  bool timedOut = false;
  consumer.expressInterest(i, [&](const Data&) { ++received; }, [&] { timedOut = true; });
  f.sched.runUntilIdle();
  CHECK(received == 1);
  CHECK(timedOut);
  CHECK(handlerCalls == 2);

  // without mustBeFresh the stale copy is still served
  Interest relaxed{Name::fromUri("/p/x")};
  relaxed.mustBeFresh = false;
  consumer.expressInterest(relaxed, [&](const Data&) { ++received; }, [] {});
  f.sched.runUntilIdle();
  CHECK(received == 2);
}

TEST_CASE("duplicate prefix registration on the same face is an error")
{
  Fixture f;
  Face& face = f.fwd.createFace();
  face.registerPrefix(Name::fromUri("/a"), [](const Interest&) {});
  CHECK_THROWS_AS(face.registerPrefix(Name::fromUri("/a"), [](const Interest&) {}),
                  NetError);
  CHECK_THROWS_AS(face.registerPrefix(Name(), [](const Interest&) {}), NetError);
}

TEST_CASE("interests cross links and data returns along the PIT trail")
{
  Scheduler sched;
  auto rng = std::make_shared<Rng>(Rng::seeded(8003));
  Forwarder fa(sched, rng);
  Forwarder fb(sched, rng);
  auto link = Link::connect(fa, fb, LinkPolicy{10, 0.0}, LinkPolicy{10, 0.0});

  Face& producer = fb.createFace();
  producer.registerPrefix(Name::fromUri("/p"),
                          [&](const Interest& i) { producer.put(makeData(i.name, "far")); });
  fa.addRoute(Name::fromUri("/p"), link->faceOn(fa));

  Face& consumer = fa.createFace();
  std::string got;
  consumer.expressInterest(Interest{Name::fromUri("/p/x")},
                           [&](const Data& d) { got = toString(d.content); }, [] {});
  sched.runUntilIdle();
  CHECK(got == "far");
  CHECK(sched.nowMs() >= 20); // one RTT of link delay
}

TEST_CASE("total loss on the only link times every interest out")
{
  Scheduler sched;
  auto rng = std::make_shared<Rng>(Rng::seeded(8004));
  Forwarder fa(sched, rng);
  Forwarder fb(sched, rng);
  auto link = Link::connect(fa, fb, LinkPolicy{5, 1.0}, LinkPolicy{5, 1.0});

  Face& producer = fb.createFace();
  int producerCalls = 0;
  producer.registerPrefix(Name::fromUri("/p"), [&](const Interest&) { ++producerCalls; });
  fa.addRoute(Name::fromUri("/p"), link->faceOn(fa));

  Face& consumer = fa.createFace();
  int timeouts = 0;
  for (int i = 0; i < 10; ++i) {
    Interest in{Name::fromUri("/p/i" + std::to_string(i))};
    in.lifetimeMs = 200;
    consumer.expressInterest(in, [](const Data&) { FAIL("no data expected"); },
                             [&] { ++timeouts; });
  }
  sched.runUntilIdle();
  CHECK(timeouts == 10);
  CHECK(producerCalls == 0);
}

TEST_CASE("content store caches across consumers when the producer is gone")
{
  Scheduler sched;
  auto rng = std::make_shared<Rng>(Rng::seeded(8005));
  Forwarder router(sched, rng);
  Forwarder edge(sched, rng);
  auto link = Link::connect(router, edge, LinkPolicy{2, 0.0}, LinkPolicy{2, 0.0});

  Face& producer = router.createFace();
  producer.registerPrefix(Name::fromUri("/p"),
                          [&](const Interest& i) { producer.put(makeData(i.name, "warm")); });
  edge.addRoute(Name::fromUri("/p"), link->faceOn(edge));

  Face& c1 = edge.createFace();
  std::string got1;
  c1.expressInterest(Interest{Name::fromUri("/p/x")},
                     [&](const Data& d) { got1 = toString(d.content); }, [] {});
  sched.runUntilIdle();
  REQUIRE(got1 == "warm");

  // producer side goes dark; the edge CS still answers
  link->setUp(false);
  Face& c2 = edge.createFace();
  std::string got2;
  c2.expressInterest(Interest{Name::fromUri("/p/x")},
                     [&](const Data& d) { got2 = toString(d.content); }, [] {});
  sched.runUntilIdle();
  CHECK(got2 == "warm");
}

TEST_CASE("LRU eviction respects capacity")
{
  Scheduler sched;
  auto rng = std::make_shared<Rng>(Rng::seeded(8006));
  Forwarder fwd(sched, rng, 4);
  ContentStore& cs = fwd.contentStore();
  for (int i = 0; i < 8; ++i)
    cs.insert(makeData(Name::fromUri("/c/" + std::to_string(i)), "x"), 0);
  CHECK(cs.size() == 4);
  // oldest entries were evicted
  Interest probe{Name::fromUri("/c/0")};
  CHECK(cs.find(probe, 0) == nullptr);
  Interest kept{Name::fromUri("/c/7")};
  CHECK(cs.find(kept, 0) != nullptr);
}
