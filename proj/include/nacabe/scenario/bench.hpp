#pragma once

#include "runner.hpp"

#include <cmath>

namespace nacabe::scenario {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LinearFit
leastSquares(const std::vector<double>& xs, const std::vector<double>& ys)
{
  size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  LinearFit fit;
  double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom == 0.0)
    return fit;
  fit.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / static_cast<double>(n);
  double meanY = sy / static_cast<double>(n);
  double ssRes = 0, ssTot = 0;
  for (size_t i = 0; i < n; ++i) {
    double predicted = fit.slope * xs[i] + fit.intercept;
    ssRes += (ys[i] - predicted) * (ys[i] - predicted);
    ssTot += (ys[i] - meanY) * (ys[i] - meanY);
  }
  fit.r2 = ssTot == 0.0 ? 1.0 : 1.0 - ssRes / ssTot;
  return fit;
}

/// Key/ciphertext growth against the number of 32-bit timestamp
/// comparisons in a policy. In KP mode the DKEY carries the policy and the
/// CK ciphertext carries the bag-of-bits data attributes; CP mode is the
/// mirror image.
struct KeySizeBench {
  struct Row {
    int comparisons = 0;
    size_t dkeyBytes = 0;
    size_t ckBytes = 0;
    size_t dkeySegments = 0;
  };
  std::vector<Row> rows;
  LinearFit dkeyFit;
  LinearFit ckFit;
  abe::AbeType abeType = abe::AbeType::Kp;

  std::string tableText() const
  {
    std::ostringstream os;
    os << "comparisons  dkeyBytes  ckBytes  dkeySegments  (abe=" << abe::abeTypeToken(abeType)
       << ")\n";
    for (const auto& r : rows)
      os << "          " << r.comparisons << "  " << r.dkeyBytes << "  " << r.ckBytes
         << "  " << r.dkeySegments << "\n";
    os << "dkey linear fit: slope " << dkeyFit.slope << " B/comparison, R^2 " << dkeyFit.r2
       << "\n";
    os << "ck   linear fit: slope " << ckFit.slope << " B/comparison, R^2 " << ckFit.r2
       << "\n";
    return os.str();
  }
};

inline KeySizeBench
benchKeySize(abe::AbeType type, int maxComparisons, uint64_t seed, size_t mss = DefaultMss,
             int samplesPerPoint = 8)
{
  Rng rng = Rng::seeded(seed);
  auto [params, master] = abe::setup(type, rng);
  KeySizeBench bench;
  bench.abeType = type;

  Bytes ck = rng.bytes(32);
  for (int c = 1; c <= maxComparisons; ++c) {
    // the bag-of-bits expansion size varies with the drawn value's bit
    // pattern, so each table point is a mean over fresh draws
    size_t dkeyTotal = 0;
    size_t ckTotal = 0;
    for (int sample = 0; sample < samplesPerPoint; ++sample) {
      // policy: AND of c fresh 32-bit timestamp comparisons
      std::string policyText;
      abe::AttributeSet dataAttrs;
      for (int i = 0; i < c; ++i) {
        uint32_t threshold = rng.nextU32();
        if (threshold == 0xFFFFFFFFu)
          --threshold; // keep GT satisfiable
        std::string attrName = "ts" + std::to_string(i);
        if (!policyText.empty())
          policyText += " AND ";
        policyText += attrName + " > " + std::to_string(threshold);
        dataAttrs.merge(abe::dataAttributesFor(attrName, rng.nextU32(), 32));
      }
      abe::PolicyExpr policy = abe::parsePolicy(policyText);
      if (type == abe::AbeType::Kp) {
        dkeyTotal += abe::kpKeygen(master, policy, rng).serialize().size();
        ckTotal += abe::kpEncrypt(params, dataAttrs, ck, rng).serialize().size();
      }
      else {
        dkeyTotal += abe::cpKeygen(master, dataAttrs, rng).serialize().size();
        ckTotal += abe::cpEncrypt(params, policy, ck, rng).serialize().size();
      }
    }

    KeySizeBench::Row row;
    row.comparisons = c;
    row.dkeyBytes = dkeyTotal / static_cast<size_t>(samplesPerPoint);
    row.ckBytes = ckTotal / static_cast<size_t>(samplesPerPoint);
    row.dkeySegments = (row.dkeyBytes + mss - 1) / mss;
    bench.rows.push_back(row);
  }

  std::vector<double> xs, dkeyYs, ckYs;
  for (const auto& r : bench.rows) {
    xs.push_back(r.comparisons);
    dkeyYs.push_back(static_cast<double>(r.dkeyBytes));
    ckYs.push_back(static_cast<double>(r.ckBytes));
  }
  bench.dkeyFit = leastSquares(xs, dkeyYs);
  bench.ckFit = leastSquares(xs, ckYs);
  return bench;
}

/// CK-mint and ABE-encryption counts for a production schedule, with the
/// caching policy under test against the mint-every-item baseline
/// (maxItems=1, the original library's behavior).
struct CkCacheBench {
  struct Row {
    std::string label;
    uint64_t cksGenerated = 0;
    uint64_t abeEncryptions = 0;
    int64_t totalVirtualMs = 0;
  };
  Row cached;
  Row baseline;

  std::string tableText() const
  {
    std::ostringstream os;
    os << "run       cksGenerated  abeEncryptions  totalVirtualMs\n";
    for (const Row* r : {&cached, &baseline})
      os << r->label << "  " << r->cksGenerated << "  " << r->abeEncryptions << "  "
         << r->totalVirtualMs << "\n";
    return os.str();
  }
};

namespace detail {

inline CkCacheBench::Row
runCkCacheTrial(std::string label, uint64_t nItems, CkCachePolicy policy,
                uint64_t tagCount, int64_t intervalMs, uint64_t seed)
{
  Scheduler sched;
  auto rng = std::make_shared<Rng>(Rng::seeded(seed));
  Forwarder fwd(sched, rng);
  Face& aaFace = fwd.createFace();
  Face& producerFace = fwd.createFace();

  Identity anchor = Identity::makeAnchor(Name::fromUri("/bench"), *rng);
  Identity aaId = Identity::makeSigned(Name::fromUri("/bench/aa/main"), anchor, *rng);
  Identity producerId =
    Identity::makeSigned(Name::fromUri("/bench/producer/p"), anchor, *rng);

  AttributeAuthority aa(aaFace, aaId, abe::AbeType::Kp, rng);
  abe::AttributeSet universe;
  for (uint64_t t = 0; t < std::max<uint64_t>(tagCount, 1); ++t)
    universe.insert(abe::Attribute::plain("tag" + std::to_string(t)));
  aa.registerAttributes(universe);
  aa.publishPubParams();

  Encryptor::Options eo;
  eo.servedPrefixes = {Name::fromUri("/bench/data")};
  Encryptor enc(producerFace, producerId, aaId.prefix, abe::AbeType::Kp, policy, rng,
                nullptr, eo);

  uint64_t failures = 0;
  for (uint64_t i = 0; i < nItems; ++i) {
    sched.schedule(static_cast<int64_t>(i) * intervalMs, [&enc, &failures, i, tagCount] {
      abe::AttributeSet tag{
        "tag" + std::to_string(tagCount == 0 ? 0 : i % tagCount)};
      enc.produce(Name::fromUri("/bench/data/i" + std::to_string(i)),
                  toBytes("sensor reading"), tag, [&failures](Encryptor::ProduceResult r) {
                    if (!r.ok)
                      ++failures;
                  });
    });
  }
  sched.runUntilIdle();
  if (failures != 0)
    throw Error("bench productions failed");

  CkCacheBench::Row row;
  row.label = std::move(label);
  row.cksGenerated = enc.stats().cksMinted;
  row.abeEncryptions = enc.stats().abeEncryptions;
  row.totalVirtualMs = sched.nowMs();
  return row;
}

} // namespace detail

inline CkCacheBench
benchCkCache(uint64_t nItems, uint64_t maxItems, int64_t maxAgeMs, uint64_t tagCount,
             int64_t intervalMs, uint64_t seed)
{
  CkCacheBench bench;
  bench.cached = detail::runCkCacheTrial("cached  ", nItems,
                                         CkCachePolicy{maxItems, maxAgeMs}, tagCount,
                                         intervalMs, seed);
  bench.baseline = detail::runCkCacheTrial("baseline", nItems, CkCachePolicy{1, 0},
                                           tagCount, intervalMs, seed);
  return bench;
}

} // namespace nacabe::scenario
