#include "sloppykit/errors.hpp"
#include "sloppykit/models/beeler_reuter.hpp"
#include "sloppykit/models/ecosystem.hpp"
#include "sloppykit/models/michaelis_menten.hpp"

namespace sloppykit {

std::unique_ptr<Model> make_model(const std::string& name) {
  if (name == "michaelis_menten")
    return std::make_unique<MichaelisMentenModel>();
  if (name == "ecosystem") return std::make_unique<EcosystemModel>();
  if (name == "beeler_reuter") return std::make_unique<BeelerReuterModel>();
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace sloppykit
