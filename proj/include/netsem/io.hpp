#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>

namespace netsem {

// Writes through a temporary sibling file and renames it into place.
void WriteFileAtomically(const std::filesystem::path& path,
                         const std::function<void(std::ostream&)>& write);

}  // namespace netsem
