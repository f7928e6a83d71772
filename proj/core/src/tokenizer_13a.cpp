#include <string>
#include <string_view>
#include <vector>

#include "pivotmt/metrics.hpp"
#include "pivotmt/text.hpp"

namespace pivotmt {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

// The class [{-~ [-` SP-& (-+ :-@ /]: ASCII punctuation and space, leaving
// out letters, digits, and ' , - .
bool in_general_punct_class(char32_t c) {
  return (c >= 0x7B && c <= 0x7E) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x20 && c <= 0x26) || (c >= 0x28 && c <= 0x2B) ||
         (c >= 0x3A && c <= 0x40) || c == 0x2F;
}

bool is_period_or_comma(char32_t c) { return c == U'.' || c == U','; }

}  // namespace

std::vector<std::string> tokenize_13a(std::string_view line) {
  std::string s(line);
  replace_all(s, "<skipped>", "");
  replace_all(s, "-\n", "");
  replace_all(s, "\n", " ");
  if (s.find('&') != std::string::npos) {
    replace_all(s, "&quot;", "\"");
    replace_all(s, "&amp;", "&");
    replace_all(s, "&lt;", "<");
    replace_all(s, "&gt;", ">");
  }

  std::u32string cps = text::decode_utf8(" " + s + " ");

  // Each pass mirrors one left-to-right, non-overlapping regex substitution.
  std::u32string a;
  a.reserve(cps.size() * 2);
  for (char32_t c : cps) {
    if (in_general_punct_class(c)) {
      a.push_back(U' ');
      a.push_back(c);
      a.push_back(U' ');
    } else {
      a.push_back(c);
    }
  }

  // ([^0-9])([.,]) -> "\1 \2 "
  std::u32string b;
  b.reserve(a.size() * 2);
  for (size_t i = 0; i < a.size();) {
    if (i + 1 < a.size() && !is_ascii_digit(a[i]) && is_period_or_comma(a[i + 1])) {
      b.push_back(a[i]);
      b.push_back(U' ');
      b.push_back(a[i + 1]);
      b.push_back(U' ');
      i += 2;
    } else {
      b.push_back(a[i]);
      ++i;
    }
  }

  // ([.,])([^0-9]) -> " \1 \2"
  std::u32string c;
  c.reserve(b.size() * 2);
  for (size_t i = 0; i < b.size();) {
    if (i + 1 < b.size() && is_period_or_comma(b[i]) && !is_ascii_digit(b[i + 1])) {
      c.push_back(U' ');
      c.push_back(b[i]);
      c.push_back(U' ');
      c.push_back(b[i + 1]);
      i += 2;
    } else {
      c.push_back(b[i]);
      ++i;
    }
  }

  // ([0-9])(-) -> "\1 \2"
  std::u32string d;
  d.reserve(c.size() * 2);
  for (size_t i = 0; i < c.size();) {
    if (i + 1 < c.size() && is_ascii_digit(c[i]) && c[i + 1] == U'-') {
      d.push_back(c[i]);
      d.push_back(U' ');
      d.push_back(c[i + 1]);
      i += 2;
    } else {
      d.push_back(c[i]);
      ++i;
    }
  }

  return text::split_ws(text::encode_utf8(d));
}

}  // namespace pivotmt
