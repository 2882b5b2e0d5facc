#include <fstream>
#include <sstream>

#include "bundled_data.hpp"
#include "healsim/architecture.hpp"
#include "healsim/error.hpp"

namespace healsim {

namespace {

using nlohmann::json;

const json& member(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(Errc::kInvalidBlueprint,
                std::string("invalid blueprint: ") + where + " lacks \"" + key + "\"");
  }
  return obj.at(key);
}

std::string string_member(const json& obj, const char* key, const char* where) {
  const auto& v = member(obj, key, where);
  if (!v.is_string()) {
    throw Error(Errc::kInvalidBlueprint, std::string("invalid blueprint: ") + where +
                                             " \"" + key + "\" must be a string");
  }
  return v.get<std::string>();
}

const json& array_member(const json& obj, const char* key, const char* where) {
  const auto& v = member(obj, key, where);
  if (!v.is_array()) {
    throw Error(Errc::kInvalidBlueprint, std::string("invalid blueprint: ") + where +
                                             " \"" + key + "\" must be a list");
  }
  return v;
}

}  // namespace

Blueprint parse_blueprint(const json& doc) {
  std::vector<ComponentType> types;
  for (const auto& t : array_member(doc, "types", "document")) {
    ComponentType type;
    type.name = string_member(t, "name", "type");
    type.provided_interface = string_member(t, "provides", "type");
    for (const auto& r : array_member(t, "requires", "type")) {
      if (!r.is_string()) {
        throw Error(Errc::kInvalidBlueprint,
                    "invalid blueprint: required interfaces must be strings");
      }
      type.required_interfaces.push_back(r.get<std::string>());
    }
    types.push_back(std::move(type));
  }

  std::vector<SlotSpec> slots;
  for (const auto& s : array_member(doc, "slots", "document")) {
    slots.push_back({string_member(s, "slot", "slot"), string_member(s, "type", "slot")});
  }

  std::vector<ConnectorRef> connectors;
  for (const auto& c : array_member(doc, "connectors", "document")) {
    connectors.push_back({string_member(c, "from", "connector"),
                          string_member(c, "to", "connector"),
                          string_member(c, "interface", "connector")});
  }

  return Blueprint::create(std::move(types), std::move(slots), std::move(connectors));
}

Blueprint parse_blueprint(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kInvalidBlueprint, std::string("invalid blueprint JSON: ") + e.what());
  }
  return parse_blueprint(doc);
}

Blueprint load_blueprint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot read blueprint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_blueprint(std::string_view(buf.str()));
}

json blueprint_to_json(const Blueprint& bp) {
  json types = json::array();
  for (const auto& t : bp.component_types()) {
    types.push_back(
        {{"name", t.name}, {"provides", t.provided_interface}, {"requires", t.required_interfaces}});
  }
  json slots = json::array();
  for (const auto& s : bp.slots()) slots.push_back({{"slot", s.slot}, {"type", s.type_name}});
  json connectors = json::array();
  for (const auto& c : bp.intended_connectors()) {
    connectors.push_back({{"from", c.from}, {"to", c.to}, {"interface", c.interface}});
  }
  return {{"types", types}, {"slots", slots}, {"connectors", connectors}};
}

std::string_view default_blueprint_json() noexcept { return detail::bundled_blueprint_json(); }

std::shared_ptr<const Blueprint> default_blueprint() {
  static const auto bp =
      std::make_shared<const Blueprint>(parse_blueprint(default_blueprint_json()));
  return bp;
}

}  // namespace healsim
