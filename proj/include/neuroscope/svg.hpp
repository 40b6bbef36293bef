#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace neuroscope::svg {

/// Fixed three-decimal formatting so that emitted markup is byte-stable.
std::string num(double v);
std::string escape(std::string_view text);

using Attributes = std::vector<std::pair<std::string, std::string>>;

/// Minimal append-only SVG document writer.
class Document {
 public:
  Document(double width, double height);

  void open_group(const Attributes& attrs = {});
  void close_group();
  void rect(double x, double y, double w, double h, std::string_view fill,
            const Attributes& extra = {});
  void circle(double cx, double cy, double r, std::string_view fill,
              std::string_view stroke, const Attributes& extra = {});
  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double width = 1.0, const Attributes& extra = {});
  void text(double x, double y, std::string_view content, double size = 12.0,
            std::string_view anchor = "start", const Attributes& extra = {});
  void image(double x, double y, double w, double h, std::string_view href,
             const Attributes& extra = {});
  void raw(std::string_view markup);

  std::string str() const;
  void save(const std::string& path) const;

 private:
  double width_;
  double height_;
  std::string body_;
  int depth_ = 1;
};

}  // namespace neuroscope::svg
