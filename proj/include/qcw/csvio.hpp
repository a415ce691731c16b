#pragma once

#include <string>

#include "qcw/model.hpp"

// Control-field CSV format: `# key=value` comment lines carrying picture
// (rwa|schrodinger), interp (pwc|linear), and the two carriers, then a
// "t,env_y,env_z" header and one row per grid sample at full double
// precision. Loading snaps the grid onto the exact uniform nodes i/N the
// steppers assume, so a save/load round trip is bitwise.

namespace qcw {

void write_field_csv(const std::string& path, const ControlField& f);
ControlField read_field_csv(const std::string& path);

} // namespace qcw
