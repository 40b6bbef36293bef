#include "neuroscope/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "neuroscope/errors.hpp"

namespace neuroscope::svg {

std::string num(double v) {
  if (!std::isfinite(v)) throw ArgumentError("svg: non-finite coordinate");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

namespace {

std::string attrs(const Attributes& extra) {
  std::string out;
  for (const auto& [k, v] : extra) out += " " + k + "=\"" + escape(v) + "\"";
  return out;
}

}  // namespace

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::open_group(const Attributes& a) {
  body_ += std::string(depth_ * 2, ' ') + "<g" + attrs(a) + ">\n";
  ++depth_;
}

void Document::close_group() {
  if (depth_ <= 1) throw ArgumentError("svg: close_group without open_group");
  --depth_;
  body_ += std::string(depth_ * 2, ' ') + "</g>\n";
}

void Document::rect(double x, double y, double w, double h, std::string_view fill,
                    const Attributes& extra) {
  body_ += std::string(depth_ * 2, ' ') + "<rect x=\"" + num(x) + "\" y=\"" + num(y) +
           "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"" + escape(fill) +
           "\"" + attrs(extra) + "/>\n";
}

void Document::circle(double cx, double cy, double r, std::string_view fill,
                      std::string_view stroke, const Attributes& extra) {
  body_ += std::string(depth_ * 2, ' ') + "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) +
           "\" r=\"" + num(r) + "\" fill=\"" + escape(fill) + "\" stroke=\"" + escape(stroke) +
           "\"" + attrs(extra) + "/>\n";
}

void Document::line(double x1, double y1, double x2, double y2, std::string_view stroke,
                    double width, const Attributes& extra) {
  body_ += std::string(depth_ * 2, ' ') + "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) +
           "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + escape(stroke) +
           "\" stroke-width=\"" + num(width) + "\"" + attrs(extra) + "/>\n";
}

void Document::text(double x, double y, std::string_view content, double size,
                    std::string_view anchor, const Attributes& extra) {
  body_ += std::string(depth_ * 2, ' ') + "<text x=\"" + num(x) + "\" y=\"" + num(y) +
           "\" font-size=\"" + num(size) + "\" text-anchor=\"" + escape(anchor) + "\"" +
           attrs(extra) + ">" + escape(content) + "</text>\n";
}

void Document::image(double x, double y, double w, double h, std::string_view href,
                     const Attributes& extra) {
  body_ += std::string(depth_ * 2, ' ') + "<image x=\"" + num(x) + "\" y=\"" + num(y) +
           "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" href=\"" + escape(href) +
           "\"" + attrs(extra) + "/>\n";
}

void Document::raw(std::string_view markup) {
  body_ += std::string(depth_ * 2, ' ');
  body_ += markup;
  body_ += '\n';
}

std::string Document::str() const {
  if (depth_ != 1) throw ArgumentError("svg: unclosed group");
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
         num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n" +
         body_ + "</svg>\n";
}

void Document::save(const std::string& path) const {
  const std::string text = str();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace neuroscope::svg
