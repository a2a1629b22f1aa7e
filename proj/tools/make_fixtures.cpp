// Regenerates the committed fixture files under fixtures/.

#include <cstdio>
#include <string>

#include "dbar/geometry.hpp"
#include "dbar/io.hpp"

using namespace dbar;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";

  BoundaryFixture chest;
  chest.curve = make_chest_boundary<double>(128);
  chest.electrode_angles = equispaced_angles<double>(32);
  save_boundary_fixture(dir + "/chest_boundary.json", chest);

  BoundaryFixture disk;
  disk.curve = make_disk_boundary<double>(64);
  disk.electrode_angles = equispaced_angles<double>(32);
  save_boundary_fixture(dir + "/disk_boundary.json", disk);

  std::printf("fixtures written to %s\n", dir.c_str());
  return 0;
}
