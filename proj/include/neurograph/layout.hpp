#ifndef NEUROGRAPH_LAYOUT_HPP
#define NEUROGRAPH_LAYOUT_HPP

#include <array>
#include <string>
#include <vector>

namespace ng {

struct Channel {
  std::string name;
  std::array<double, 3> pos;  // head-radius units, x=right y=front z=up

  bool operator==(const Channel&) const = default;
};

// Named electrode positions; the node set of the channel graph.
struct ChannelLayout {
  std::vector<Channel> channels;
  double head_radius = 0.0;

  std::size_t count() const noexcept { return channels.size(); }

  // Throws on duplicate names (case-insensitive), count < 2, radius <= 0.
  void validate() const;
  // Max position norm; used when no explicit head radius is given.
  double max_norm() const;

  bool operator==(const ChannelLayout&) const = default;
};

double distance(const Channel& a, const Channel& b);

// Plain-text layout file: one `name x y z` line per channel, optional
// `# head_radius <value>` header. Keywords matched case-insensitively.
ChannelLayout load_layout(const std::string& path);
ChannelLayout parse_layout(const std::string& text);
void save_layout(const ChannelLayout& layout, const std::string& path);

// Built-in 12-channel set on the unit sphere, matching the usual 10-20
// positions for a lateral/posterior headset with the prefrontal pair removed.
ChannelLayout default_layout12();

}  // namespace ng

#endif
