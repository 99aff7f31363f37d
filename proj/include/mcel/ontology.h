#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mcel {

struct Entity {
  std::string id;
  std::string canonical_name;
  std::vector<std::string> synonyms;

  // Canonical name first, then synonyms in file order.
  std::vector<std::string> names() const;

  bool operator==(const Entity&) const = default;
};

enum class Split { kTrain, kDev, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct Mention {
  std::string text;
  std::optional<std::string> gold_id;
  Split split = Split::kTest;
  std::size_t ordinal = 0;
  // Carried through ingestion but never used by the linker.
  std::optional<std::string> context;
  // gold_id is present but names no entity of the ontology.
  bool dangling_gold = false;

  bool has_valid_gold() const { return gold_id.has_value() && !dangling_gold; }
};

enum class FileFormat { kTsv, kJsonl };

FileFormat parse_file_format(std::string_view name);
// Picks kJsonl for *.jsonl / *.json paths and kTsv otherwise.
FileFormat format_from_path(const std::filesystem::path& path);

// Immutable entity inventory with a case-folded name index.
class Ontology {
 public:
  // Normalizes synonyms (drops empties and case-folded duplicates of the
  // canonical name or of each other). Throws DuplicateId or Error.
  static Ontology from_entities(std::vector<Entity> entities);

  std::size_t size() const { return entities_.size(); }
  const std::vector<Entity>& entities() const { return entities_; }
  const Entity* find(std::string_view id) const;
  const Entity& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  // Case-folded exact match over canonical names and synonyms.
  std::set<std::string> lookup(std::string_view name) const;
  const std::map<std::string, std::set<std::string>>& name_index() const { return name_index_; }

 private:
  std::vector<Entity> entities_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::set<std::string>> name_index_;
};

std::set<std::string> lookup_by_name(const Ontology& ontology, std::string_view name);

Ontology parse_ontology(std::istream& in, FileFormat format, const std::string& source = "<stream>");
Ontology ingest_ontology(const std::filesystem::path& path, FileFormat format);
Ontology ingest_ontology(const std::filesystem::path& path);
void write_ontology(std::ostream& out, const Ontology& ontology, FileFormat format);

struct MentionSet {
  std::vector<Mention> mentions;
  std::size_t dangling = 0;
};

MentionSet parse_mentions(std::istream& in, FileFormat format, Split split, const Ontology& ontology,
                          const std::string& source = "<stream>");
MentionSet ingest_mentions(const std::filesystem::path& path, Split split, const Ontology& ontology);
void write_mentions(std::ostream& out, const std::vector<Mention>& mentions, FileFormat format);

}  // namespace mcel
