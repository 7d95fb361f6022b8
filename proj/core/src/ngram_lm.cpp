#include "delconf/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "delconf/corpus.hpp"
#include "delconf/embedding.hpp"
#include "delconf/error.hpp"

namespace delconf::features {

namespace {

// log10 probability written for the sentence-start pseudo-unigram.
constexpr double kNeverPredicted = -99.0;
const double kLn10 = std::log(10.0);

std::string join(std::span<const std::string> tokens) {
  std::string key;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) key += ' ';
    key += tokens[i];
  }
  return key;
}

void check_token(const std::string& token) {
  if (token.empty()) throw ValidationError("language model text contains an empty token");
  if (token.find_first_of(" \t\r\n") != std::string::npos)
    throw ValidationError("language model token '" + token + "' contains whitespace");
  if (token == kSentenceStart || token == kUnknownToken)
    throw ValidationError("language model text uses reserved token '" + token + "'");
}

}  // namespace

const NgramLm::Entry* NgramLm::find(std::span<const std::string> ngram) const {
  if (ngram.empty() || ngram.size() > order_) return nullptr;
  const auto& table = grams_[ngram.size() - 1];
  const auto it = table.find(join(ngram));
  return it == table.end() ? nullptr : &it->second;
}

std::vector<std::string> NgramLm::vocabulary() const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : grams_[0])
    if (key != kSentenceStart) out.push_back(key);
  std::sort(out.begin(), out.end());
  return out;
}

bool NgramLm::in_vocabulary(const std::string& word) const {
  return word != kSentenceStart && grams_[0].count(word) != 0;
}

std::size_t NgramLm::count(std::size_t n) const {
  return n >= 1 && n <= order_ ? grams_[n - 1].size() : 0;
}

bool NgramLm::contains(std::span<const std::string> ngram) const { return find(ngram) != nullptr; }

double NgramLm::log_backoff(std::span<const std::string> context) const {
  const Entry* e = find(context);
  return e ? e->log10_backoff * kLn10 : 0.0;
}

NgramLm::Score NgramLm::score(const std::string& word, std::span<const std::string> history) const {
  const bool known = in_vocabulary(word);
  const std::string target = known ? word : std::string(kUnknownToken);
  if (history.size() + 1 > order_) history = history.subspan(history.size() + 1 - order_);

  std::vector<std::string> ngram;
  ngram.reserve(history.size() + 1);
  for (const auto& h : history) ngram.push_back(in_vocabulary(h) || h == kSentenceStart ? h : kUnknownToken);
  ngram.push_back(target);

  // Back off from the longest n-gram, collecting context backoff weights.
  double log10p = 0.0;
  std::size_t order_used = 0;
  for (std::size_t start = 0; start < ngram.size(); ++start) {
    const std::span<const std::string> gram(ngram.data() + start, ngram.size() - start);
    if (const Entry* e = find(gram)) {
      log10p += e->log10_prob;
      order_used = gram.size();
      break;
    }
    if (const Entry* ctx = find(gram.first(gram.size() - 1))) log10p += ctx->log10_backoff;
  }
  return {log10p * kLn10, known ? order_used : 0};
}

double NgramLm::prob(const std::string& word, std::span<const std::string> history) const {
  return std::exp(score(word, history).logp);
}

NgramLm train_ngram_lm(const std::vector<std::vector<std::string>>& text, std::size_t order, double discount) {
  if (order == 0) throw ValidationError("language model order must be at least 1");
  if (!(discount > 0.0 && discount < 1.0)) throw ValidationError("absolute discount must lie in (0,1)");

  // counts[n-1][ngram]; std::map keeps the later passes deterministic.
  std::vector<std::map<std::vector<std::string>, double>> counts(order);
  std::size_t words = 0;
  for (const auto& sentence : text) {
    std::vector<std::string> seq{kSentenceStart};
    for (const auto& tok : sentence) {
      check_token(tok);
      seq.push_back(tok);
    }
    for (std::size_t i = 1; i < seq.size(); ++i) {
      ++words;
      for (std::size_t n = 1; n <= order && n <= i + 1; ++n)
        counts[n - 1][std::vector<std::string>(seq.begin() + static_cast<long>(i + 1 - n),
                                               seq.begin() + static_cast<long>(i + 1))] += 1.0;
    }
  }
  if (words == 0) throw ValidationError("cannot train a language model on empty text");

  NgramLm lm;
  lm.order_ = order;
  lm.discount_ = discount;
  lm.grams_.resize(order);

  const double total = static_cast<double>(words);
  for (const auto& [gram, c] : counts[0])
    lm.grams_[0][gram[0]].log10_prob = std::log10((c - discount) / total);
  lm.grams_[0][kUnknownToken].log10_prob =
      std::log10(discount * static_cast<double>(counts[0].size()) / total);
  lm.grams_[0][kSentenceStart].log10_prob = kNeverPredicted;

  for (std::size_t n = 2; n <= order; ++n) {
    // Context totals and distinct followers.
    std::map<std::vector<std::string>, std::pair<double, double>> contexts;
    for (const auto& [gram, c] : counts[n - 1]) {
      auto& ctx = contexts[std::vector<std::string>(gram.begin(), gram.end() - 1)];
      ctx.first += c;
      ctx.second += 1.0;
    }
    for (const auto& [gram, c] : counts[n - 1]) {
      const double ctx_total = contexts[std::vector<std::string>(gram.begin(), gram.end() - 1)].first;
      lm.grams_[n - 1][join(gram)].log10_prob = std::log10((c - discount) / ctx_total);
    }
    // Backoff weights of the (n-1)-gram contexts. The lower-order
    // distribution used here is already complete.
    for (const auto& [ctx, stats] : contexts) {
      double seen_lower = 0.0;
      for (auto it = counts[n - 1].lower_bound(ctx); it != counts[n - 1].end(); ++it) {
        if (!std::equal(ctx.begin(), ctx.end(), it->first.begin())) break;
        const std::vector<std::string> lower_hist(ctx.begin() + 1, ctx.end());
        seen_lower += lm.prob(it->first.back(), lower_hist);
      }
      const double freed = discount * stats.second / stats.first;
      auto* entry = &lm.grams_[n - 2].at(join(ctx));
      entry->log10_backoff = std::log10(freed / (1.0 - seen_lower));
    }
  }
  return lm;
}

std::string NgramLm::to_arpa() const {
  std::string out = "# absolute-discount " + corpus::format_number(discount_) + "\n\n\\data\\\n";
  for (std::size_t n = 1; n <= order_; ++n)
    out += "ngram " + std::to_string(n) + "=" + std::to_string(grams_[n - 1].size()) + "\n";
  for (std::size_t n = 1; n <= order_; ++n) {
    out += "\n\\" + std::to_string(n) + "-grams:\n";
    std::vector<const std::pair<const std::string, Entry>*> rows;
    for (const auto& row : grams_[n - 1]) rows.push_back(&row);
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
    for (const auto* row : rows) {
      out += corpus::format_number(row->second.log10_prob) + '\t' + row->first;
      if (n < order_) out += '\t' + corpus::format_number(row->second.log10_backoff);
      out += '\n';
    }
  }
  out += "\n\\end\\\n";
  return out;
}

NgramLm NgramLm::from_arpa(std::string_view text) {
  try {
    return parse_arpa(text);
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("ARPA text: ") + e.what());
  }
}

NgramLm NgramLm::parse_arpa(std::string_view text) {
  NgramLm lm;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw ParseError("ARPA line " + std::to_string(line_no) + ": " + what);
  };
  std::vector<std::size_t> declared;
  std::size_t section = 0;  // current n-gram order, 0 outside sections
  bool in_data = false;
  bool ended = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# absolute-discount ", 0) == 0) {
      lm.discount_ = std::strtod(line.c_str() + 20, nullptr);
      continue;
    }
    if (line == "\\data\\") {
      in_data = true;
      continue;
    }
    if (line == "\\end\\") {
      ended = true;
      break;
    }
    if (line.rfind("ngram ", 0) == 0 && section == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("malformed count line");
      const auto n = std::stoul(line.substr(6, eq - 6));
      if (n != declared.size() + 1) fail("n-gram counts out of order");
      declared.push_back(std::stoul(line.substr(eq + 1)));
      continue;
    }
    if (line.front() == '\\') {
      unsigned n = 0;
      if (std::sscanf(line.c_str(), "\\%u-grams:", &n) != 1 || n == 0 || n > declared.size())
        fail("unexpected section header");
      section = n;
      continue;
    }
    if (!in_data) continue;
    if (section == 0) fail("n-gram entry outside a section");
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, '\t')) fields.push_back(field);
    if (fields.size() < 2 || fields.size() > 3) fail("expected log10 prob, n-gram and optional backoff");
    Entry e;
    e.log10_prob = std::strtod(fields[0].c_str(), nullptr);
    if (fields.size() == 3) e.log10_backoff = std::strtod(fields[2].c_str(), nullptr);
    if (static_cast<std::size_t>(std::count(fields[1].begin(), fields[1].end(), ' ')) + 1 != section)
      fail("n-gram length does not match section");
    if (lm.grams_.size() < declared.size()) lm.grams_.resize(declared.size());
    lm.grams_[section - 1][fields[1]] = e;
  }
  if (!ended) throw ParseError("ARPA text lacks \\end\\ marker");
  if (declared.empty()) throw ParseError("ARPA text declares no n-grams");
  lm.order_ = declared.size();
  lm.grams_.resize(lm.order_);
  for (std::size_t n = 0; n < declared.size(); ++n)
    if (lm.grams_[n].size() != declared[n]) throw ParseError("ARPA n-gram counts do not match the header");
  if (!lm.grams_[0].count(kUnknownToken)) throw ParseError("ARPA model lacks the unknown token");
  return lm;
}

}  // namespace delconf::features
