// Regenerates the committed desk-scale panel fixture. The flows fixture is
// hand-written; its totals row-normalize to the canonical weight matrix.
#include <cstdio>

#include "gvarsv/ingest.hpp"
#include "gvarsv/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <panel.csv>\n", argv[0]);
    return 2;
  }
  gvarsv::TrueWorld world = gvarsv::canonical_world(7151);
  world.T = 220;
  gvarsv::GeneratedData data =
      gvarsv::generate(world, gvarsv::Quarter{1990, 1}, 40);
  gvarsv::write_panel_csv(data.panel, argv[1]);
  std::printf("wrote %s (%d rows x %d countries)\n", argv[1],
              data.panel.rows(),
              static_cast<int>(data.panel.countries().size()));
  return 0;
}
