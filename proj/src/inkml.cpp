#include <expat.h>

#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>

#include "inkpipe/error.hpp"
#include "inkpipe/ingest.hpp"

namespace inkpipe {
namespace {

std::string_view local_name(const char* qname) {
  std::string_view n(qname);
  const auto colon = n.rfind(':');
  return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

const char* attribute(const char** attrs, std::string_view name) {
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    if (std::string_view(attrs[i]) == name) return attrs[i + 1];
  }
  return nullptr;
}

struct RawPoint {
  double x, y, t;
  bool has_t;
};

struct Channels {
  int x = 0;
  int y = 1;
  int t = 2;  // -1 when the format declares no time channel
  int count = -1;  // -1: unknown, accept 2 or 3 values
  double t_scale = 1.0;
};

struct GroupBuilder {
  InkmlTraceGroup group;
};

struct DocBuilder {
  std::vector<std::vector<RawPoint>> traces;
  std::map<std::string, std::size_t> trace_ids;
  std::map<std::string, std::string> annotations;
  std::vector<InkmlTraceGroup> groups;
  std::vector<std::string> diagnostics;
};

class InkmlParser {
 public:
  explicit InkmlParser(std::string_view name) : name_(name), parser_(XML_ParserCreate(nullptr)) {
    XML_SetUserData(parser_, this);
    XML_SetElementHandler(parser_, &InkmlParser::on_start, &InkmlParser::on_end);
    XML_SetCharacterDataHandler(parser_, &InkmlParser::on_text);
  }
  ~InkmlParser() { XML_ParserFree(parser_); }
  InkmlParser(const InkmlParser&) = delete;
  InkmlParser& operator=(const InkmlParser&) = delete;

  std::vector<InkmlDocument> parse(std::string_view xml) {
    if (XML_Parse(parser_, xml.data(), static_cast<int>(xml.size()), XML_TRUE) == XML_STATUS_ERROR) {
      std::ostringstream msg;
      msg << name_ << ":" << XML_GetCurrentLineNumber(parser_) << ": malformed XML: "
          << XML_ErrorString(XML_GetErrorCode(parser_));
      throw ValidationError(msg.str());
    }
    if (!failure_.empty()) throw ValidationError(failure_);
    if (docs_.empty()) throw ValidationError(std::string(name_) + ": no <ink> element");
    return std::move(docs_);
  }

 private:
  static void on_start(void* self, const char* name, const char** attrs) {
    static_cast<InkmlParser*>(self)->start(local_name(name), attrs);
  }
  static void on_end(void* self, const char* name) { static_cast<InkmlParser*>(self)->end(local_name(name)); }
  static void on_text(void* self, const char* s, int len) {
    auto* p = static_cast<InkmlParser*>(self);
    if (p->collecting_) p->text_.append(s, static_cast<std::size_t>(len));
  }

  std::string where() const {
    return std::string(name_) + ":" + std::to_string(XML_GetCurrentLineNumber(parser_));
  }

  void start(std::string_view el, const char** attrs) {
    stack_.emplace_back(el);
    if (el == "ink") {
      doc_ = std::make_unique<DocBuilder>();
    } else if (el == "traceFormat") {
      format_ = {};
      format_.t = -1;
      format_.count = 0;
      in_format_ = true;
    } else if (el == "channel" && in_format_) {
      const char* n = attribute(attrs, "name");
      const std::string_view channel = n ? n : "";
      if (channel == "X") format_.x = format_.count;
      if (channel == "Y") format_.y = format_.count;
      if (channel == "T") {
        format_.t = format_.count;
        const char* units = attribute(attrs, "units");
        if (units && std::string_view(units) == "ms") format_.t_scale = 0.001;
      }
      ++format_.count;
    } else if (el == "trace" || el == "annotation") {
      collecting_ = true;
      text_.clear();
      const char* id = attribute(attrs, "xml:id");
      if (!id) id = attribute(attrs, "id");
      pending_id_ = id ? id : "";
      const char* type = attribute(attrs, "type");
      pending_type_ = type ? type : "annotation";
    } else if (el == "traceGroup") {
      open_groups_.push_back({});
    } else if (el == "traceView" && !open_groups_.empty() && doc_) {
      const char* ref = attribute(attrs, "traceDataRef");
      std::string_view r = ref ? ref : "";
      if (!r.empty() && r.front() == '#') r.remove_prefix(1);
      const auto it = doc_->trace_ids.find(std::string(r));
      if (it != doc_->trace_ids.end()) {
        open_groups_.back().traces.push_back(it->second);
      } else {
        doc_->diagnostics.push_back(where() + ": traceView references unknown trace '" + std::string(r) + "'");
      }
    }
  }

  void end(std::string_view el) {
    stack_.pop_back();
    const std::string_view parent = stack_.empty() ? std::string_view{} : std::string_view(stack_.back());
    if (el == "traceFormat") {
      in_format_ = false;
      if (format_.count < 2) format_ = {};
    } else if (el == "trace") {
      collecting_ = false;
      if (doc_) add_trace();
    } else if (el == "annotation") {
      collecting_ = false;
      if (!doc_) return;
      const std::string value = trimmed(text_);
      if (parent == "traceGroup" && !open_groups_.empty()) {
        if (open_groups_.back().label.empty() || pending_type_ == "truth") open_groups_.back().label = value;
      } else if (parent == "ink") {
        doc_->annotations[pending_type_] = value;
      }
    } else if (el == "traceGroup") {
      if (open_groups_.empty()) return;
      InkmlTraceGroup g = std::move(open_groups_.back());
      open_groups_.pop_back();
      if (doc_ && (!g.label.empty() || !g.traces.empty())) doc_->groups.push_back(std::move(g));
    } else if (el == "ink") {
      finish();
    }
  }

  static std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
  }

  void add_trace() {
    const std::size_t index = doc_->traces.size();
    std::vector<RawPoint> points;
    std::string_view rest = text_;
    bool ok = true;
    std::string problem;
    while (ok && !rest.empty()) {
      const auto comma = rest.find(',');
      std::string_view chunk = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);

      std::vector<double> values;
      std::size_t pos = 0;
      while (pos < chunk.size()) {
        while (pos < chunk.size() && std::isspace(static_cast<unsigned char>(chunk[pos]))) ++pos;
        if (pos >= chunk.size()) break;
        std::size_t e = pos;
        while (e < chunk.size() && !std::isspace(static_cast<unsigned char>(chunk[e]))) ++e;
        const std::string_view tok = chunk.substr(pos, e - pos);
        pos = e;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          ok = false;
          problem = "unsupported value '" + std::string(tok) + "'";
          break;
        }
        values.push_back(v);
      }
      if (!ok) break;
      if (values.empty()) continue;
      const int need = std::max(format_.x, format_.y) + 1;
      if (static_cast<int>(values.size()) < need) {
        ok = false;
        problem = "point " + std::to_string(points.size()) + " has " + std::to_string(values.size()) +
                  " value(s), missing coordinates";
        break;
      }
      RawPoint p{values[static_cast<std::size_t>(format_.x)], values[static_cast<std::size_t>(format_.y)], 0.0,
                 false};
      if (format_.t >= 0 && static_cast<int>(values.size()) > format_.t) {
        p.t = values[static_cast<std::size_t>(format_.t)] * format_.t_scale;
        p.has_t = true;
      }
      points.push_back(p);
    }
    if (ok && points.empty()) {
      ok = false;
      problem = "empty trace";
    }
    if (!ok) {
      doc_->diagnostics.push_back(where() + ": trace " + std::to_string(index) + " skipped: " + problem);
      doc_->traces.emplace_back();  // keep indices aligned with document order
    } else {
      doc_->traces.push_back(std::move(points));
    }
    if (!pending_id_.empty()) doc_->trace_ids[pending_id_] = index;
  }

  void finish() {
    if (!doc_) return;
    // Drop skipped traces and remap group indices onto the surviving strokes.
    std::vector<std::ptrdiff_t> remap(doc_->traces.size(), -1);
    bool all_timed = true;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < doc_->traces.size(); ++i) {
      if (doc_->traces[i].empty()) continue;
      remap[i] = static_cast<std::ptrdiff_t>(kept++);
      for (const auto& p : doc_->traces[i]) all_timed = all_timed && p.has_t;
    }
    if (kept == 0) {
      failure_ = where() + ": ink has no usable traces";
      doc_.reset();
      return;
    }
    std::vector<Stroke> strokes;
    std::size_t k = 0;
    for (const auto& trace : doc_->traces) {
      if (trace.empty()) continue;
      std::vector<Point> pts;
      for (const auto& p : trace) {
        pts.push_back({p.x, p.y, all_timed ? p.t : static_cast<double>(k) * kSynthesizedDt});
        ++k;
      }
      strokes.push_back(Stroke::clamped(std::move(pts)));
    }
    InkmlDocument doc{Ink(std::move(strokes)), std::move(doc_->annotations), {}, !all_timed,
                      std::move(doc_->diagnostics)};
    for (auto& g : doc_->groups) {
      InkmlTraceGroup mapped{std::move(g.label), {}};
      for (std::size_t t : g.traces) {
        if (t < remap.size() && remap[t] >= 0) mapped.traces.push_back(static_cast<std::size_t>(remap[t]));
      }
      doc.groups.push_back(std::move(mapped));
    }
    docs_.push_back(std::move(doc));
    doc_.reset();
  }

  std::string_view name_;
  XML_Parser parser_;
  std::vector<std::string> stack_;
  std::unique_ptr<DocBuilder> doc_;
  std::vector<InkmlTraceGroup> open_groups_;
  std::vector<InkmlDocument> docs_;
  Channels format_;
  bool in_format_ = false;
  bool collecting_ = false;
  std::string text_;
  std::string pending_id_;
  std::string pending_type_;
  std::string failure_;
};

}  // namespace

std::vector<InkmlDocument> parse_inkml(std::string_view xml, std::string_view name) {
  InkmlParser parser(name);
  return parser.parse(xml);
}

std::vector<InkmlDocument> read_inkml(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string xml((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_inkml(xml, path.string());
}

}  // namespace inkpipe
