#include "mcel/ontology.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "mcel/error.h"
#include "mcel/text.h"

namespace mcel {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::string json_string(const json& rec, const char* key, const std::string& source, std::size_t line,
                        bool required) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) {
    if (required) throw ParseError(source, line, std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw ParseError(source, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Entity parse_entity_tsv(std::string_view line, const std::string& source, std::size_t lineno) {
  auto cols = split(line, '\t');
  if (cols.size() < 2 || cols.size() > 3) {
    throw ParseError(source, lineno, "expected 'id<TAB>name[<TAB>syn1|syn2...]'");
  }
  Entity e;
  e.id = std::string(trim(cols[0]));
  e.canonical_name = std::string(trim(cols[1]));
  if (cols.size() == 3) {
    for (auto syn : split(cols[2], '|')) e.synonyms.emplace_back(trim(syn));
  }
  if (e.id.empty()) throw ParseError(source, lineno, "empty entity id");
  if (e.canonical_name.empty()) throw ParseError(source, lineno, "empty canonical name");
  return e;
}

Entity parse_entity_jsonl(std::string_view line, const std::string& source, std::size_t lineno) {
  json rec = json::parse(line, nullptr, false);
  if (rec.is_discarded() || !rec.is_object()) throw ParseError(source, lineno, "malformed JSON record");
  Entity e;
  e.id = json_string(rec, "id", source, lineno, true);
  e.canonical_name = json_string(rec, "name", source, lineno, true);
  if (auto it = rec.find("synonyms"); it != rec.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(source, lineno, "'synonyms' must be an array");
    for (const auto& s : *it) {
      if (!s.is_string()) throw ParseError(source, lineno, "synonym must be a string");
      e.synonyms.push_back(s.get<std::string>());
    }
  }
  if (e.id.empty()) throw ParseError(source, lineno, "empty entity id");
  if (e.canonical_name.empty()) throw ParseError(source, lineno, "empty canonical name");
  return e;
}

bool skippable(std::string_view line) { return trim(line).empty(); }

}  // namespace

std::vector<std::string> Entity::names() const {
  std::vector<std::string> out;
  out.reserve(1 + synonyms.size());
  out.push_back(canonical_name);
  out.insert(out.end(), synonyms.begin(), synonyms.end());
  return out;
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "test";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error("unknown split '" + std::string(name) + "'");
}

FileFormat parse_file_format(std::string_view name) {
  if (name == "tsv" || name == "tsv-dict") return FileFormat::kTsv;
  if (name == "jsonl") return FileFormat::kJsonl;
  throw Error("unknown file format '" + std::string(name) + "'");
}

FileFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? FileFormat::kJsonl : FileFormat::kTsv;
}

Ontology Ontology::from_entities(std::vector<Entity> entities) {
  if (entities.empty()) throw Error("ontology has no entities");
  Ontology o;
  o.entities_ = std::move(entities);
  for (std::size_t i = 0; i < o.entities_.size(); ++i) {
    Entity& e = o.entities_[i];
    if (e.id.empty()) throw Error("entity with empty id");
    if (e.canonical_name.empty()) throw Error("entity " + e.id + " has an empty canonical name");
    if (!o.by_id_.emplace(e.id, i).second) throw DuplicateId(e.id);

    std::set<std::string> seen{casefold(e.canonical_name)};
    std::vector<std::string> kept;
    for (auto& syn : e.synonyms) {
      if (syn.empty()) continue;
      if (seen.insert(casefold(syn)).second) kept.push_back(std::move(syn));
    }
    e.synonyms = std::move(kept);
    for (const auto& key : seen) o.name_index_[key].insert(e.id);
  }
  return o;
}

const Entity* Ontology::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entities_[it->second];
}

const Entity& Ontology::at(std::string_view id) const {
  const Entity* e = find(id);
  if (e == nullptr) throw Error("unknown entity id: " + std::string(id));
  return *e;
}

std::set<std::string> Ontology::lookup(std::string_view name) const {
  auto it = name_index_.find(casefold(name));
  if (it == name_index_.end()) return {};
  return it->second;
}

std::set<std::string> lookup_by_name(const Ontology& ontology, std::string_view name) {
  return ontology.lookup(name);
}

Ontology parse_ontology(std::istream& in, FileFormat format, const std::string& source) {
  std::vector<Entity> entities;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Entity e = format == FileFormat::kTsv ? parse_entity_tsv(line, source, lineno)
                                          : parse_entity_jsonl(line, source, lineno);
    if (!ids.insert(e.id).second) throw DuplicateId(e.id);
    entities.push_back(std::move(e));
  }
  return Ontology::from_entities(std::move(entities));
}

Ontology ingest_ontology(const std::filesystem::path& path, FileFormat format) {
  auto in = open_input(path);
  return parse_ontology(in, format, path.string());
}

Ontology ingest_ontology(const std::filesystem::path& path) {
  return ingest_ontology(path, format_from_path(path));
}

void write_ontology(std::ostream& out, const Ontology& ontology, FileFormat format) {
  for (const auto& e : ontology.entities()) {
    if (format == FileFormat::kTsv) {
      out << e.id << '\t' << e.canonical_name;
      if (!e.synonyms.empty()) {
        out << '\t';
        for (std::size_t i = 0; i < e.synonyms.size(); ++i) out << (i ? "|" : "") << e.synonyms[i];
      }
      out << '\n';
    } else {
      json rec = {{"id", e.id}, {"name", e.canonical_name}, {"synonyms", e.synonyms}};
      out << rec.dump() << '\n';
    }
  }
}

MentionSet parse_mentions(std::istream& in, FileFormat format, Split split_tag, const Ontology& ontology,
                          const std::string& source) {
  MentionSet result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Mention m;
    m.split = split_tag;
    m.ordinal = result.mentions.size();
    std::string gold;
    if (format == FileFormat::kTsv) {
      auto cols = split(line, '\t');
      if (cols.size() < 2 || cols.size() > 3) {
        throw ParseError(source, lineno, "expected 'text<TAB>gold_id[<TAB>context]'");
      }
      m.text = std::string(trim(cols[0]));
      gold = std::string(trim(cols[1]));
      if (cols.size() == 3) m.context = std::string(cols[2]);
    } else {
      json rec = json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.is_object()) throw ParseError(source, lineno, "malformed JSON record");
      m.text = json_string(rec, "text", source, lineno, true);
      gold = json_string(rec, "gold_id", source, lineno, false);
      if (rec.contains("context") && !rec["context"].is_null()) {
        m.context = json_string(rec, "context", source, lineno, false);
      }
    }
    if (m.text.empty()) throw ParseError(source, lineno, "empty mention text");
    if (!gold.empty()) {
      m.gold_id = gold;
      if (!ontology.contains(gold)) {
        m.dangling_gold = true;
        ++result.dangling;
      }
    }
    result.mentions.push_back(std::move(m));
  }
  return result;
}

MentionSet ingest_mentions(const std::filesystem::path& path, Split split_tag, const Ontology& ontology) {
  auto in = open_input(path);
  return parse_mentions(in, format_from_path(path), split_tag, ontology, path.string());
}

void write_mentions(std::ostream& out, const std::vector<Mention>& mentions, FileFormat format) {
  for (const auto& m : mentions) {
    if (format == FileFormat::kTsv) {
      out << m.text << '\t' << m.gold_id.value_or("");
      if (m.context) out << '\t' << *m.context;
      out << '\n';
    } else {
      json rec = {{"text", m.text}, {"gold_id", m.gold_id.value_or("")}};
      if (m.context) rec["context"] = *m.context;
      out << rec.dump() << '\n';
    }
  }
}

}  // namespace mcel
