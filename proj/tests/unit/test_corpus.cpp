// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <set>

#include "msivd/common/error.hpp"
#include "msivd/corpus/cwe.hpp"
#include "msivd/corpus/nvd.hpp"
#include "msivd/corpus/samples.hpp"
#include "msivd/corpus/serialize.hpp"
#include "msivd/corpus/split.hpp"
#include "msivd/corpus/synthetic.hpp"
#include "msivd/dfa/parser.hpp"
#include "support/fixtures.hpp"

using namespace msivd;
using namespace msivd::corpus;
using msivd::testing::data_file;

namespace {

const VulnerabilityRecord& record_named(const std::vector<VulnerabilityRecord>& recs,
                                        const std::string& id) {
  auto it = std::find_if(recs.begin(), recs.end(), [&](const auto& r) { return r.cve_id == id; });
  REQUIRE(it != recs.end());
  return *it;
}

CodeSample dated(const std::string& id, Date d, bool label = false) {
  CodeSample s;
  s.sample_id = id;
  s.code = "int f(int a) {\n  return a;\n}\n";
  s.label = label;
  s.cwe_id = "CWE-787";
  s.cwe_category = CweCategory::BufferError;
  if (label) {
    s.vuln_line_start = 2;
    s.vuln_line_end = 2;
    s.fix_code = "return 0;\n";
  }
  s.origin_date = d;
  return s;
}

}  // namespace

TEST_CASE("fixture dump: records need a reference URL") {
  const auto parsed = parse_nvd_dump(data_file("nvd_fixture.json"));
  CHECK(parsed.records.size() == 2);
  REQUIRE(parsed.skipped.size() == 1);
  CHECK(parsed.skipped[0].id == "CVE-2022-1002");
  CHECK(parsed.skipped[0].reason.find("reference") != std::string::npos);
  CHECK(parse_nvd_dump("[]").records.empty());
}

TEST_CASE("NVD v2 entry carries the CVSS fields") {
  const auto parsed = parse_nvd_dump(data_file("nvd_v2_sample.json"));
  REQUIRE(parsed.records.size() == 1);
  const auto& r = parsed.records[0];
  CHECK(r.cve_id == "CVE-2023-32699");
  CHECK(r.cwe_id == "CWE-770");
  CHECK(r.severity == Severity::medium);
  CHECK(r.attack_complexity == AttackComplexity::low);
  REQUIRE(r.exploitability_score);
  CHECK(*r.exploitability_score == doctest::Approx(2.8));
  CHECK(r.fix_commit_date == Date(2023, 6, 1));
  CHECK(r.patch_links().size() == 1);
}

TEST_CASE("missing CWE becomes CWE-unknown") {
  const auto parsed = parse_nvd_dump(
      R"([{"cve_id":"CVE-1","description":"d","fix_commit_date":"2020-01-01","references":[{"url":"u"}]}])");
  REQUIRE(parsed.records.size() == 1);
  CHECK(parsed.records[0].cwe_id == "CWE-unknown");
}

TEST_CASE("malformed JSON reports the byte offset") {
  try {
    parse_nvd_dump("[{\"cve_id\": }]");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 13);
    CHECK(std::string(e.what()).find("byte 13") != std::string::npos);
  }
}

TEST_CASE("patch filter keeps tagged commit links in order") {
  const auto parsed = parse_nvd_dump(data_file("nvd_patch_filter.json"));
  REQUIRE(parsed.records.size() == 10);
  const auto kept = filter_patch_records(parsed.records);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].cve_id == "CVE-2021-2001");
  CHECK(kept[1].cve_id == "CVE-2021-2004");
  CHECK(kept[2].cve_id == "CVE-2021-2008");
  // CVE-2021-2002 links a commit without the Patch tag.
  CHECK(std::none_of(kept.begin(), kept.end(), [](auto& r) { return r.cve_id == "CVE-2021-2002"; }));
  CHECK(filter_patch_records({}).empty());
}

TEST_CASE("one positive sample per changed file") {
  const auto recs = parse_nvd_dump(data_file("nvd_fixture.json")).records;
  const auto& rec = record_named(recs, "CVE-2022-1001");
  const auto batch = split_into_file_samples(rec);
  REQUIRE(batch.samples.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s = batch.samples[i];
    CHECK(s.label);
    CHECK(s.sample_id == "CVE-2022-1001:" + std::to_string(i));
    CHECK(s.origin_date == rec.fix_commit_date);
    CHECK(s.cwe_category == CweCategory::BufferError);
    REQUIRE(s.vuln_line_start);
    CHECK(*s.vuln_line_start <= *s.vuln_line_end);
    CHECK(*s.vuln_line_end <= static_cast<int>(count_lines(s.code)));
  }
  // The inserted mask makes line 2 the change site and the fix hunk its text.
  CHECK(*batch.samples[0].vuln_line_start == 2);
  CHECK(batch.samples[0].fix_code == "  n = n % 16;\n");

  WindowOptions cpp;
  cpp.cpp_only = true;
  const auto only_c = split_into_file_samples(rec, cpp);
  CHECK(only_c.samples.size() == 2);
  REQUIRE(only_c.skipped.size() == 1);
  CHECK(only_c.skipped[0].reason.find("gen.py") != std::string::npos);

  VulnerabilityRecord empty = rec;
  empty.file_patches.clear();
  CHECK_THROWS_AS(split_into_file_samples(empty), Error);
}

TEST_CASE("window contains the changed range 350-375") {
  const auto recs = parse_nvd_dump(data_file("nvd_fixture.json")).records;
  const auto& rec = record_named(recs, "CVE-2023-32699");
  const auto pre_lines = split_lines(rec.file_patches[0].pre_code);
  for (std::uint64_t seed : {0u, 1u, 2u, 99u}) {
    WindowOptions opt;
    opt.seed = seed;
    const auto s = split_into_file_samples(rec, opt).samples.at(0);
    CHECK(s.code.size() <= opt.max_tokens);
    const auto win = split_lines(s.code);
    // Locate the window in the original file through its first line.
    const auto first = std::find(pre_lines.begin(), pre_lines.end(), win.front());
    REQUIRE(first != pre_lines.end());
    const int offset = static_cast<int>(first - pre_lines.begin());
    CHECK(offset + *s.vuln_line_start == 350);
    CHECK(offset + *s.vuln_line_end == 375);
  }
  WindowOptions a, b;
  a.seed = b.seed = 5;
  CHECK(split_into_file_samples(rec, a).samples == split_into_file_samples(rec, b).samples);
}

TEST_CASE("window honours the byte budget") {
  std::vector<std::string> owned;
  for (int i = 0; i < 200; ++i) owned.push_back("line " + std::to_string(i));
  std::vector<std::string_view> lines(owned.begin(), owned.end());
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int start = 1 + static_cast<int>(rng.below(190));
    const LineRange focus{start, start + static_cast<int>(rng.below(10))};
    const auto win = choose_window(lines, focus, 300, rng);
    std::size_t bytes = 0;
    for (int l = win.start; l <= win.end; ++l) bytes += lines[static_cast<std::size_t>(l - 1)].size() + 1;
    CHECK(bytes <= 300);
    CHECK(win.start <= focus.start);
    CHECK(win.end >= focus.end);
  }
}

TEST_CASE("negative samples use post-fix code") {
  const auto recs = parse_nvd_dump(data_file("nvd_fixture.json")).records;
  const auto& rec = record_named(recs, "CVE-2022-1001");
  const auto neg = make_negative_sample(rec, 0);
  CHECK_FALSE(neg.label);
  CHECK(neg.sample_id == "CVE-2022-1001:0:neg");
  CHECK(neg.code == rec.file_patches[0].post_code);
  CHECK_FALSE(neg.vuln_line_start);
  CHECK_FALSE(neg.vuln_line_end);
  CHECK_FALSE(neg.fix_code);
  CHECK_THROWS_AS(make_negative_sample(rec, 3), Error);
}

TEST_CASE("line diff counts") {
  auto d = diff_lines("a\nb\nc\nd\n", "a\nB\nc\nd\n");
  CHECK(d.added == 1);
  CHECK(d.removed == 1);
  CHECK(d.changed_fraction() == doctest::Approx(0.5));
  CHECK(d.pre_range == LineRange{2, 2});
  CHECK(d.post_hunk == "B\n");

  d = diff_lines("a\nb\n", "a\nb\n");
  CHECK(d.changed_fraction() == 0.0);

  // Middle lines shared after reordering count once through the LCS.
  d = diff_lines("x\n1\n2\n3\ny\n", "x\n2\n3\n4\ny\n");
  CHECK(d.removed == 1);
  CHECK(d.added == 1);
}

TEST_CASE("exclusion rule fixtures") {
  for (const auto& c : msivd::testing::run_exclusion_fixtures()) {
    CAPTURE(c.name);
    CHECK(c.verdict == c.expected);
  }
  CodeSample s = dated("x", Date(2022, 1, 1), true);
  s.code = "int f(int a) {\n  a = a + 1;\n  a = a + 2;\n  a = a + 3;\n  return a;\n}\n";
  s.vuln_line_start = s.vuln_line_end = 2;
  CHECK(apply_exclusion_filters(s, 0.8) == DropReason::MassRewrite);
  CHECK(apply_exclusion_filters(s, 0.7) == std::nullopt);
  ExclusionOptions windows;
  windows.function_level = false;
  s.code = "  call(a);\n  b = 1;\n  c = 2;\n  d = 3;\n  e = 4;\n";
  CHECK(apply_exclusion_filters(s, 0.1) == DropReason::Incomplete);
  CHECK(apply_exclusion_filters(s, 0.1, windows) == std::nullopt);
}

TEST_CASE("exclusion filters are idempotent on kept samples") {
  for (const auto& s : make_synthetic_corpus({})) {
    const double frac = s.label ? 0.2 : 0.0;
    const auto first = apply_exclusion_filters(s, frac);
    CHECK(first == std::nullopt);
    CHECK(apply_exclusion_filters(s, frac) == first);
  }
}

TEST_CASE("CWE categories") {
  CHECK(classify_cwe("CWE-125") == CweCategory::BufferError);
  CHECK(classify_cwe("CWE-787") == CweCategory::BufferError);
  CHECK(classify_cwe("CWE-89") == CweCategory::InputValidationError);
  CHECK(classify_cwe("cwe-134 ") == CweCategory::InputValidationError);
  CHECK(classify_cwe("CWE-9999") == CweCategory::Other);
  CHECK(classify_cwe("CWE-unknown") == CweCategory::Other);
  for (auto c : kAllCategories) CHECK(parse_category(to_string(c)) == c);

  std::vector<CodeSample> pool;
  const char* ids[] = {"CWE-125", "CWE-20", "CWE-400", "CWE-269", "CWE-190", "CWE-1", "CWE-787"};
  for (int i = 0; i < 70; ++i) {
    auto s = dated("s" + std::to_string(i), Date(2022, 1, 1));
    s.cwe_id = ids[i % 7];
    s.cwe_category = classify_cwe(s.cwe_id);
    pool.push_back(s);
  }
  std::size_t total = 0;
  for (auto c : kAllCategories) total += filter_by_category(pool, c).size();
  CHECK(total == pool.size());
  CHECK(filter_by_category(pool, CweCategory::BufferError).size() == 20);
  CHECK(filter_by_category({}, CweCategory::Other).empty());
}

TEST_CASE("class mixing presets") {
  std::vector<CodeSample> pool;
  for (int i = 0; i < 1000; ++i) pool.push_back(dated("n" + std::to_string(i), Date(2022, 1, 1)));
  for (int i = 0; i < 200; ++i) pool.push_back(dated("p" + std::to_string(i), Date(2022, 1, 1), true));
  auto share = [](const std::vector<CodeSample>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [](auto& s) { return !s.label; })) /
           static_cast<double>(v.size());
  };
  const auto big = mix_classes(pool, kBigVulNegativeShare, 1);
  CHECK(share(big) == doctest::Approx(0.94).epsilon(0.005));
  const auto precise = mix_classes(pool, kPreciseBugsNegativeShare, 1);
  CHECK(share(precise) == doctest::Approx(0.80).epsilon(0.005));
  CHECK(precise.size() == 1000);
  CHECK(mix_classes(pool, 0.94, 1) == big);
  CHECK_THROWS_AS(mix_classes(pool, 1.0, 1), UsageError);
}

TEST_CASE("split on the 100-sample fixture") {
  const auto samples = read_samples_jsonl(data_file("samples_100.jsonl"));
  REQUIRE(samples.size() == 100);
  SplitSpec split_spec;
  split_spec.seed = 4;
  const auto split = make_split(samples, split_spec);
  CHECK(split.train.size() == 80);
  CHECK(split.eval.size() == 10);
  CHECK(split.test.size() == 10);
  for (const auto* part : {&split.eval, &split.test})
    for (const auto& s : *part) CHECK(s.origin_date >= Date(2023, 1, 1));
  for (const auto& s : split.train) CHECK(s.origin_date < Date(2023, 1, 1));
  std::set<std::string> ids;
  for (auto name : {SplitName::Train, SplitName::Eval, SplitName::Test})
    for (const auto& s : split[name]) CHECK(ids.insert(s.sample_id).second);

  const auto again = make_split(samples, split_spec);
  CHECK(write_splits_json(assignment_of(split)) == write_splits_json(assignment_of(again)));
  CHECK(write_samples_jsonl(split.test) == write_samples_jsonl(again.test));
}

TEST_CASE("split pools follow the cutoff") {
  std::vector<CodeSample> pool;
  for (int i = 0; i < 16; ++i) pool.push_back(dated("old" + std::to_string(i), Date(2022, 6, 1)));
  for (int i = 0; i < 4; ++i) pool.push_back(dated("new" + std::to_string(i), Date(2023, 3, 1)));
  const auto split = make_split(pool, {});
  for (const auto& s : split.train) CHECK(s.sample_id.starts_with("old"));
  for (const auto& s : split.eval) CHECK(s.sample_id.starts_with("new"));
  for (const auto& s : split.test) CHECK(s.sample_id.starts_with("new"));

  // Surplus pre-cutoff samples stay unassigned.
  for (int i = 16; i < 40; ++i) pool.push_back(dated("old" + std::to_string(i), Date(2021, 6, 1)));
  const auto capped = make_split(pool, {});
  const auto assigned = static_cast<double>(capped.size());
  CHECK(capped.eval.size() + capped.test.size() == 4);
  CHECK(std::abs(static_cast<double>(capped.train.size()) - 0.8 * assigned) <= 1.0);
  CHECK(std::abs(static_cast<double>(capped.eval.size()) - 0.1 * assigned) <= 1.0);
}

TEST_CASE("split errors") {
  std::vector<CodeSample> old_only;
  for (int i = 0; i < 10; ++i) old_only.push_back(dated("o" + std::to_string(i), Date(2022, 1, 1)));
  try {
    make_split(old_only, {});
    FAIL("expected Error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("10 samples before 2023-01-01") != std::string::npos);
    CHECK(msg.find("0 on or after") != std::string::npos);
  }
  SplitSpec bad;
  bad.ratios = {0.8, 0.1, 0.2};
  CHECK_THROWS_AS(make_split(old_only, bad), UsageError);

  SplitSpec flat;
  flat.temporal = false;
  const auto s = make_split(old_only, flat);
  CHECK(s.train.size() == 8);
  CHECK(s.eval.size() == 1);
  CHECK(s.test.size() == 1);
}

TEST_CASE("split targets") {
  CHECK(split_targets(100, {0.8, 0.1, 0.1}) == std::array<std::size_t, 3>{80, 10, 10});
  CHECK(split_targets(7, {0.8, 0.1, 0.1}) == std::array<std::size_t, 3>{5, 1, 1});
  for (std::size_t n = 0; n < 60; ++n) {
    const auto t = split_targets(n, {0.5, 0.3, 0.2});
    CHECK(t[0] + t[1] + t[2] == n);
    CHECK(std::abs(static_cast<double>(t[1]) - 0.3 * static_cast<double>(n)) <= 1.0);
  }
}

TEST_CASE("samples.jsonl round trip and layout") {
  auto samples = make_synthetic_corpus({});
  const auto text = write_samples_jsonl(samples);
  CHECK(read_samples_jsonl(text) == samples);
  CHECK(text.back() == '\n');
  CHECK(read_samples_jsonl("").empty());

  const auto first_line = text.substr(0, text.find('\n'));
  const auto j = nlohmann::json::parse(first_line);
  CHECK(j.size() == 10);
  for (const char* key : {"sample_id", "code", "label", "cwe_id", "cwe_category", "description",
                          "vuln_line_start", "vuln_line_end", "fix_code", "origin_date"})
    CHECK(j.contains(key));

  const auto neg = std::find_if(samples.begin(), samples.end(), [](auto& s) { return !s.label; });
  const auto nj = sample_to_json(*neg);
  CHECK(nj["fix_code"].is_null());
  CHECK(nj["vuln_line_start"].is_null());
}

TEST_CASE("samples.jsonl errors name the line") {
  const auto good = write_samples_jsonl(std::vector<CodeSample>{dated("a", Date(2022, 1, 1))});
  const std::string text = good + good.substr(0, good.size() / 2) + "\n";
  try {
    read_samples_jsonl(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  auto bad_range = dated("b", Date(2022, 1, 1), true);
  bad_range.vuln_line_end = 9;
  const auto line = write_samples_jsonl(std::vector<CodeSample>{bad_range});
  CHECK_THROWS_AS(read_samples_jsonl(line), ParseError);
}

TEST_CASE("splits.json round trip") {
  const auto samples = read_samples_jsonl(data_file("samples_100.jsonl"));
  const auto split = make_split(samples, {});
  const auto text = write_splits_json(assignment_of(split));
  const auto back = read_splits_json(text);
  CHECK(back == assignment_of(split));
  const auto rebuilt = apply_assignment(samples, back);
  CHECK(rebuilt.train == split.train);
  CHECK(rebuilt.test == split.test);
  CHECK_THROWS_AS(read_splits_json(R"({"a":"validation"})"), ParseError);
}

TEST_CASE("synthetic corpus") {
  const auto corpus = make_synthetic_corpus({});
  REQUIRE(corpus.size() == 200);
  const auto positives = std::count_if(corpus.begin(), corpus.end(), [](auto& s) { return s.label; });
  CHECK(positives == 100);
  const auto early = std::count_if(corpus.begin(), corpus.end(),
                                   [](auto& s) { return s.origin_date < Date(2023, 1, 1); });
  CHECK(early == 160);
  for (const auto& s : corpus) {
    CAPTURE(s.code);
    CHECK_NOTHROW(dfa::parse_mini_c(s.code));
    CHECK(s.code.size() < 200);
    if (s.label) CHECK(s.fix_code);
  }
  CHECK(make_synthetic_corpus({}) == corpus);
  const auto split = make_split(corpus, {});
  CHECK(split.train.size() == 160);
  CHECK(split.test.size() == 20);
}
