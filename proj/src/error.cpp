#include "neurograph/error.hpp"

#include <cstdio>

namespace ng {

namespace {
void default_warn(std::string_view msg) {
  std::fprintf(stderr, "[neurograph] warning: %.*s\n",
               static_cast<int>(msg.size()), msg.data());
}
WarnHandler g_warn_handler = default_warn;
}  // namespace

void set_warn_handler(WarnHandler handler) {
  g_warn_handler = handler ? std::move(handler) : default_warn;
}

void warn(std::string_view msg) { g_warn_handler(msg); }

}  // namespace ng
