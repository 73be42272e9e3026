// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/diag.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "odns/crypto.hpp"
#include "odns/errors.hpp"
#include "odns/resolver.hpp"
#include "odns/rng.hpp"
#include "testnet.hpp"

namespace odns::diag {
namespace {

TEST(BenchCrypto, CoversEveryOperation) {
  auto rows = bench_crypto(100);
  ASSERT_EQ(rows.size(), 7u);
  for (const auto& row : rows) {
    EXPECT_GT(row.median_us, 0.0) << row.op;
    EXPECT_GE(row.p95_us, row.median_us) << row.op;
  }
}

TEST(BenchCrypto, SymmetricCheaperThanKeyWrap) {
  auto rows = bench_crypto(300);
  double wrap = 0, seal = 0, open = 0;
  for (const auto& row : rows) {
    if (row.op == "wrap_key") wrap = row.median_us;
    if (row.op == "seal_domain") seal = row.median_us;
    if (row.op == "open_domain") open = row.median_us;
  }
  EXPECT_LT(seal, wrap);
  EXPECT_LT(open, wrap);
}

TEST(BenchCrypto, StableAcrossIterationCounts) {
  auto fast = bench_crypto(100);
  auto slow = bench_crypto(2000);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    ASSERT_EQ(fast[i].op, slow[i].op);
    double hi = std::max(fast[i].median_us, slow[i].median_us);
    double lo = std::min(fast[i].median_us, slow[i].median_us);
    EXPECT_LT(hi, lo * 3 + 1.0) << fast[i].op;  // +1us guards the sub-microsecond ops
  }
}

TEST(BenchCrypto, RefusesTooFewIterations) {
  EXPECT_THROW(bench_crypto(99), ConfigError);
}

TEST(BenchCrypto, CsvShape) {
  auto rows = bench_crypto(100);
  std::ostringstream csv;
  write_bench_csv(csv, rows);
  EXPECT_EQ(std::count(csv.str().begin(), csv.str().end(), '\n'), 8);  // header + 7 ops
}

class DomainListFile {
public:
  explicit DomainListFile(const std::string& content) {
    path_ = testing::TempDir() + "odns_domains_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".txt";
    std::ofstream out(path_);
    out << content;
  }
  ~DomainListFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

TEST(AnalyzeQnames, ShortDomainsNeverOversize) {
  DomainListFile f("abcd\nwxyz\nq.io\n");
  auto analysis = analyze_qnames(f.path(), wire::DnsName::from_presentation("obliviousdns.com"));
  EXPECT_EQ(analysis.total, 3u);
  EXPECT_EQ(analysis.oversize, 0u);
  EXPECT_EQ(analysis.oversize_fraction, 0.0);
}

TEST(AnalyzeQnames, BoundaryDomainFlagged) {
  std::string long_domain(126, 'a');
  long_domain += "." + std::string(125, 'b');  // 252 chars
  ASSERT_EQ(long_domain.size(), 252u);
  DomainListFile f("short.test\n" + long_domain + "\n");
  auto analysis = analyze_qnames(f.path(), wire::DnsName::from_presentation("obliviousdns.com"));
  EXPECT_EQ(analysis.total, 2u);
  EXPECT_EQ(analysis.oversize, 1u);
  EXPECT_DOUBLE_EQ(analysis.oversize_fraction, 0.5);
}

TEST(AnalyzeQnames, HistogramMatchesEstimator) {
  DomainListFile f("www.foo.com\nwww.foo.com\nbar.io\n");
  auto suffix = wire::DnsName::from_presentation("odns.test");
  auto analysis = analyze_qnames(f.path(), suffix);
  std::size_t len_foo = crypto::estimate_qname_length(11, suffix.presentation_length());
  std::size_t len_bar = crypto::estimate_qname_length(6, suffix.presentation_length());
  EXPECT_EQ(analysis.histogram.at(len_foo), 2u);
  EXPECT_EQ(analysis.histogram.at(len_bar), 1u);
}

TEST(AnalyzeQnames, MissingFile) {
  EXPECT_THROW(analyze_qnames("/nonexistent/list.txt", wire::DnsName::from_presentation("odns.test")),
               FileNotFound);
}

// Probe tests run over real loopback sockets against the echo observer.
class ProbeTest : public ::testing::Test {
protected:
  void start(bool add_ecs, bool apply_0x20, bool strip_additional) {
    observer_ = std::make_unique<resolver::EchoObserverService>(net::loopback(0));
    observer_->start();
    testnet::TestRecursive::Options options;
    options.odns_zone = wire::DnsName::from_presentation("observer.test");
    options.odns_upstream = observer_->endpoint();
    options.default_upstream = observer_->endpoint();
    options.add_ecs = add_ecs;
    options.apply_0x20 = apply_0x20;
    options.strip_additional = strip_additional;
    recursive_ = std::make_unique<testnet::TestRecursive>(options);
    recursive_->start();
  }

  ProbeReport probe() {
    return probe_recursive(recursive_->endpoint(), observer_->endpoint(),
                           wire::DnsName::from_presentation("observer.test"));
  }

  std::unique_ptr<resolver::EchoObserverService> observer_;
  std::unique_ptr<testnet::TestRecursive> recursive_;
};

TEST_F(ProbeTest, PassThroughRecursiveIsClean) {
  start(false, false, false);
  ProbeReport report = probe();
  EXPECT_FALSE(report.forwards_ecs);
  EXPECT_FALSE(report.applies_0x20);
  EXPECT_FALSE(report.strips_additional);
}

TEST_F(ProbeTest, DetectsEcsInjection) {
  start(true, false, false);
  EXPECT_TRUE(probe().forwards_ecs);
}

TEST_F(ProbeTest, DetectsCaseRandomization) {
  start(false, true, false);
  EXPECT_TRUE(probe().applies_0x20);
}

TEST_F(ProbeTest, DetectsAdditionalStripping) {
  start(false, false, true);
  EXPECT_TRUE(probe().strips_additional);
}

TEST_F(ProbeTest, UnreachableObserver) {
  start(false, false, false);
  net::Endpoint dead = net::loopback(1);  // nothing listens there
  EXPECT_THROW(probe_recursive(recursive_->endpoint(), dead,
                               wire::DnsName::from_presentation("observer.test"),
                               std::chrono::milliseconds(200)),
               ObserverUnreachable);
}

}  // namespace
}  // namespace odns::diag
