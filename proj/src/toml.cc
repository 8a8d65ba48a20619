// Copyright 2026 The IoD-SAR Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "iod/scenario/toml.h"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"

namespace iod::scenario {
namespace {

using Json = nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string_view text) : s_(text) {}

  absl::StatusOr<Json> Parse() {
    Json root = Json::object();
    Json* table = &root;
    while (true) {
      SkipBlankAndComments();
      if (AtEnd()) break;
      if (Peek() == '[') {
        auto t = Header(root);
        if (!t.ok()) return t.status();
        table = *t;
      } else {
        if (absl::Status st = KeyValue(*table); !st.ok()) return st;
      }
      if (absl::Status st = EndOfLine(); !st.ok()) return st;
    }
    return root;
  }

 private:
  bool AtEnd() const { return pos_ >= s_.size(); }
  char Peek() const { return AtEnd() ? '\0' : s_[pos_]; }
  void Advance() {
    if (s_[pos_] == '\n') ++line_;
    ++pos_;
  }

  absl::Status Error(const std::string& reason) const {
    return absl::InvalidArgumentError(
        absl::StrCat("ParseError(line ", line_, "): ", reason));
  }

  void SkipSpaces() {
    while (!AtEnd() && (Peek() == ' ' || Peek() == '\t')) Advance();
  }
  void SkipComment() {
    if (Peek() != '#') return;
    while (!AtEnd() && Peek() != '\n') Advance();
  }
  void SkipBlankAndComments() {
    while (!AtEnd()) {
      SkipSpaces();
      SkipComment();
      if (Peek() == '\r' || Peek() == '\n') {
        Advance();
      } else {
        break;
      }
    }
  }
  // Inside arrays newlines and comments are whitespace.
  void SkipArraySpace() { SkipBlankAndComments(); }

  absl::Status EndOfLine() {
    SkipSpaces();
    SkipComment();
    if (Peek() == '\r') Advance();
    if (AtEnd()) return absl::OkStatus();
    if (Peek() != '\n') {
      return Error(absl::StrCat("unexpected '", std::string(1, Peek()),
                                "' after value"));
    }
    Advance();
    return absl::OkStatus();
  }

  static bool BareChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  absl::StatusOr<std::vector<std::string>> DottedKey() {
    std::vector<std::string> parts;
    while (true) {
      SkipSpaces();
      std::string part;
      if (Peek() == '"') {
        auto q = BasicString();
        if (!q.ok()) return q.status();
        part = *q;
      } else {
        while (!AtEnd() && BareChar(Peek())) {
          part.push_back(Peek());
          Advance();
        }
        if (part.empty()) return Error("expected a key");
      }
      parts.push_back(std::move(part));
      SkipSpaces();
      if (Peek() != '.') break;
      Advance();
    }
    return parts;
  }

  static std::string Joined(const std::vector<std::string>& k) {
    std::string out;
    for (const auto& p : k) {
      if (!out.empty()) out += '.';
      out += p;
    }
    return out;
  }

  // Walks to the table named by `path`, creating tables on the way. An
  // array of tables along the path resolves to its last element.
  absl::StatusOr<Json*> Descend(Json& root, const std::vector<std::string>& path,
                                size_t count) {
    Json* t = &root;
    for (size_t i = 0; i < count; ++i) {
      Json& next = (*t)[path[i]];
      if (next.is_null()) next = Json::object();
      if (next.is_array() && !next.empty() && next.back().is_object()) {
        t = &next.back();
      } else if (next.is_object()) {
        t = &next;
      } else {
        return Error(absl::StrCat("key '", path[i], "' is not a table"));
      }
    }
    return t;
  }

  absl::StatusOr<Json*> Header(Json& root) {
    Advance();  // '['
    const bool array = Peek() == '[';
    if (array) Advance();
    auto key = DottedKey();
    if (!key.ok()) return key.status();
    if (Peek() != ']') return Error("expected ']' to close the table header");
    Advance();
    if (array) {
      if (Peek() != ']') return Error("expected ']]' to close the table header");
      Advance();
    }
    auto parent = Descend(root, *key, key->size() - 1);
    if (!parent.ok()) return parent.status();
    Json& slot = (**parent)[key->back()];
    const std::string name = Joined(*key);
    if (array) {
      if (slot.is_null()) slot = Json::array();
      if (!slot.is_array()) {
        return Error(absl::StrCat("'", name, "' is already defined as a table"));
      }
      slot.push_back(Json::object());
      return &slot.back();
    }
    if (defined_.count(name)) {
      return Error(absl::StrCat("table '", name, "' defined twice"));
    }
    defined_.insert(name);
    if (slot.is_null()) slot = Json::object();
    if (!slot.is_object()) {
      return Error(absl::StrCat("'", name, "' is already a value"));
    }
    return &slot;
  }

  absl::Status KeyValue(Json& table) {
    auto key = DottedKey();
    if (!key.ok()) return key.status();
    if (Peek() != '=') return Error(absl::StrCat("expected '=' after '", Joined(*key), "'"));
    Advance();
    SkipSpaces();
    auto v = Value();
    if (!v.ok()) return v.status();
    auto t = Descend(table, *key, key->size() - 1);
    if (!t.ok()) return t.status();
    Json& slot = (**t)[key->back()];
    if (!slot.is_null()) {
      return Error(absl::StrCat("duplicate key '", Joined(*key), "'"));
    }
    slot = *std::move(v);
    return absl::OkStatus();
  }

  absl::StatusOr<std::string> BasicString() {
    Advance();  // opening quote
    std::string out;
    while (true) {
      if (AtEnd() || Peek() == '\n') return Error("unterminated string");
      char c = Peek();
      Advance();
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (AtEnd()) return Error("unterminated string");
      char e = Peek();
      Advance();
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default:
          return Error(absl::StrCat("unsupported escape '\\", std::string(1, e), "'"));
      }
    }
    return out;
  }

  absl::StatusOr<Json> Value() {
    const char c = Peek();
    if (c == '"') {
      auto s = BasicString();
      if (!s.ok()) return s.status();
      return Json(*s);
    }
    if (c == '[') return Array();
    if (c == '{') return InlineTable();
    std::string tok;
    while (!AtEnd() && (BareChar(Peek()) || Peek() == '.' || Peek() == '+')) {
      tok.push_back(Peek());
      Advance();
    }
    if (tok.empty()) return Error("expected a value");
    if (tok == "true") return Json(true);
    if (tok == "false") return Json(false);
    return Number(tok);
  }

  absl::StatusOr<Json> Number(std::string tok) {
    std::string clean;
    for (char ch : tok) {
      if (ch != '_') clean.push_back(ch);
    }
    if (clean.empty()) return Error(absl::StrCat("bad value '", tok, "'"));
    const bool is_float = clean.find_first_of(".eE") != std::string::npos &&
                          clean.rfind("0x", 0) != 0;
    const char* b = clean.data() + (clean[0] == '+' ? 1 : 0);
    const char* e = clean.data() + clean.size();
    if (is_float) {
      double d = 0;
      auto [p, ec] = std::from_chars(b, e, d);
      if (ec != std::errc() || p != e) return Error(absl::StrCat("bad number '", tok, "'"));
      return Json(d);
    }
    int64_t i = 0;
    auto [p, ec] = std::from_chars(b, e, i);
    if (ec == std::errc() && p == e) return Json(i);
    // Seeds use the full unsigned range.
    uint64_t u = 0;
    auto [pu, ecu] = std::from_chars(b, e, u);
    if (ecu == std::errc() && pu == e) return Json(u);
    return Error(absl::StrCat("bad value '", tok, "'"));
  }

  absl::StatusOr<Json> Array() {
    Advance();  // '['
    Json out = Json::array();
    while (true) {
      SkipArraySpace();
      if (AtEnd()) return Error("unterminated array");
      if (Peek() == ']') {
        Advance();
        return out;
      }
      auto v = Value();
      if (!v.ok()) return v.status();
      out.push_back(*std::move(v));
      SkipArraySpace();
      if (Peek() == ',') {
        Advance();
      } else if (Peek() != ']') {
        return Error("expected ',' or ']' in array");
      }
    }
  }

  absl::StatusOr<Json> InlineTable() {
    Advance();  // '{'
    Json out = Json::object();
    SkipSpaces();
    if (Peek() == '}') {
      Advance();
      return out;
    }
    while (true) {
      if (absl::Status st = KeyValue(out); !st.ok()) return st;
      SkipSpaces();
      if (Peek() == ',') {
        Advance();
        continue;
      }
      if (Peek() == '}') {
        Advance();
        return out;
      }
      return Error("expected ',' or '}' in inline table");
    }
  }

  std::string_view s_;
  size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> defined_;
};

}  // namespace

absl::StatusOr<nlohmann::json> ParseToml(std::string_view text) {
  return Reader(text).Parse();
}

int ParseErrorLine(const absl::Status& status) {
  const std::string msg(status.message());
  const std::string kPrefix = "ParseError(line ";
  if (msg.rfind(kPrefix, 0) != 0) return 0;
  return std::atoi(msg.c_str() + kPrefix.size());
}

}  // namespace iod::scenario
