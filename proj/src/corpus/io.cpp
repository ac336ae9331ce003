#include "ckg/corpus/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace ckg::corpus {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw LoadError("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<Token> tokenize_pretokenized(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    tokens.push_back(Token{text.substr(start, i - start), start, i});
  }
  return tokens;
}

int parse_int(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(context + ": expected integer, got '" + s + "'");
  }
}

void validate_phrase(const Document& doc, const PhraseSpan& p, const std::string& where) {
  if (p.sentence_index < 1 || static_cast<std::size_t>(p.sentence_index) > doc.sentences.size())
    throw ValidationError(where + ": sentence index " + std::to_string(p.sentence_index) +
                          " out of range in doc '" + doc.doc_id + "' (" +
                          std::to_string(doc.sentences.size()) + " sentences)");
  const Sentence& s = doc.sentences[static_cast<std::size_t>(p.sentence_index) - 1];
  if (p.start_char >= p.end_char || p.end_char > s.text.size())
    throw ValidationError(where + ": span [" + std::to_string(p.start_char) + "," +
                          std::to_string(p.end_char) + ") outside sentence " +
                          std::to_string(p.sentence_index) + " of doc '" + doc.doc_id + "'");
  const std::string sub = s.text.substr(p.start_char, p.end_char - p.start_char);
  if (sub != p.text)
    throw ValidationError(where + ": phrase text '" + p.text + "' does not match sentence " +
                          std::to_string(p.sentence_index) + " substring '" + sub + "' in doc '" +
                          doc.doc_id + "'");
}

void validate_no_overlap(const Document& doc, std::vector<PhraseSpan> spans,
                         const std::string& where) {
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    const auto& a = spans[i - 1];
    const auto& b = spans[i];
    if (a.sentence_index == b.sentence_index && b.start_char < a.end_char)
      throw ValidationError(where + ": overlapping phrase spans in sentence " +
                            std::to_string(a.sentence_index) + " of doc '" + doc.doc_id + "'");
  }
}

}  // namespace

std::vector<int> parse_sentence_ids(const fs::path& file) {
  std::vector<int> ids;
  for (const std::string& line : read_lines(file)) {
    if (line.empty()) continue;
    ids.push_back(parse_int(line, file.string()));
  }
  return ids;
}

std::vector<PhraseSpan> parse_phrase_file(const fs::path& file) {
  std::vector<PhraseSpan> spans;
  for (const std::string& line : read_lines(file)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos)
        throw ValidationError(file.string() + ": expected 4 tab-separated fields: '" + line + "'");
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    fields.push_back(line.substr(pos));
    PhraseSpan p;
    p.sentence_index = parse_int(fields[0], file.string());
    p.start_char = static_cast<std::size_t>(parse_int(fields[1], file.string()));
    p.end_char = static_cast<std::size_t>(parse_int(fields[2], file.string()));
    p.text = fields[3];
    spans.push_back(std::move(p));
  }
  return spans;
}

std::vector<Triplet> parse_triplet_file(const fs::path& file, InfoUnitLabel unit,
                                        const std::string& separator) {
  std::vector<Triplet> out;
  for (const std::string& line : read_lines(file)) {
    if (line.empty()) continue;
    std::string body = line;
    if (body.size() >= 2 && body.front() == '(' && body.back() == ')')
      body = body.substr(1, body.size() - 2);
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (parts.size() < 2) {
      std::size_t sep = body.find(separator, pos);
      if (sep == std::string::npos) break;
      parts.push_back(body.substr(pos, sep - pos));
      pos = sep + separator.size();
    }
    parts.push_back(body.substr(pos));
    if (parts.size() != 3)
      throw ValidationError(file.string() + ": expected subject" + separator + "predicate" +
                            separator + "object, got '" + line + "'");
    out.push_back(Triplet{parts[0], parts[1], parts[2], unit});
  }
  return out;
}

Document load_document(const fs::path& doc_dir, const IoConfig& cfg) {
  if (!fs::is_directory(doc_dir))
    throw LoadError("document directory not found: " + doc_dir.string());
  Document doc;
  doc.doc_id = doc_dir.filename().string();

  const fs::path sent_file = doc_dir / "sentences.txt";
  if (!fs::exists(sent_file))
    throw LoadError("doc '" + doc.doc_id + "': missing " + sent_file.string());
  int index = 1;
  for (const std::string& line : read_lines(sent_file)) {
    Sentence s;
    s.index = index++;
    s.text = line;
    s.tokens = tokenize_pretokenized(line);
    doc.sentences.push_back(std::move(s));
  }

  const fs::path ids_file = doc_dir / "contribution-sentences.txt";
  if (fs::exists(ids_file)) {
    for (Sentence& s : doc.sentences) s.gold_contribution = false;
    for (int id : parse_sentence_ids(ids_file)) {
      if (id < 1 || static_cast<std::size_t>(id) > doc.sentences.size())
        throw ValidationError("doc '" + doc.doc_id + "': gold sentence id " + std::to_string(id) +
                              " out of range (1.." + std::to_string(doc.sentences.size()) + ")");
      doc.sentences[static_cast<std::size_t>(id) - 1].gold_contribution = true;
    }
  }

  const fs::path phrase_file = doc_dir / "phrases.txt";
  if (fs::exists(phrase_file)) {
    std::vector<PhraseSpan> spans = parse_phrase_file(phrase_file);
    for (const PhraseSpan& p : spans) validate_phrase(doc, p, phrase_file.string());
    validate_no_overlap(doc, spans, phrase_file.string());
    doc.gold_phrases = std::move(spans);
  }

  const fs::path triples_dir = doc_dir / "triples";
  if (fs::is_directory(triples_dir)) {
    TripletMap triplets;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(triples_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".txt")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
      const std::string stem = file.stem().string();
      auto unit = unit_from_name(stem, cfg.unit_names);
      if (!unit)
        throw ValidationError("doc '" + doc.doc_id + "': unknown info unit file '" +
                              file.filename().string() + "'");
      triplets[*unit] = parse_triplet_file(file, *unit, cfg.triplet_separator);
    }
    doc.gold_triplets = std::move(triplets);
  }
  return doc;
}

std::vector<Document> load_split(const fs::path& root, Split split, const IoConfig& cfg) {
  const fs::path manifest = root / "manifest.txt";
  if (!fs::exists(manifest))
    throw LoadError("corpus root has no manifest.txt: " + root.string());
  std::vector<std::string> doc_ids;
  for (const std::string& line : read_lines(manifest)) {
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ValidationError("manifest line must be doc_id<TAB>split: '" + line + "'");
    if (split_from_string(line.substr(tab + 1)) == split) doc_ids.push_back(line.substr(0, tab));
  }
  if (doc_ids.empty())
    throw LoadError("no documents for split '" + to_string(split) + "' in " + manifest.string());
  std::sort(doc_ids.begin(), doc_ids.end());
  std::vector<Document> docs;
  docs.reserve(doc_ids.size());
  for (const std::string& id : doc_ids) {
    try {
      Document d = load_document(root / id, cfg);
      d.split = split;
      docs.push_back(std::move(d));
    } catch (const std::exception& e) {
      throw LoadError("failed to load doc '" + id + "': " + e.what());
    }
  }
  return docs;
}

void write_predictions(const Document& doc, const std::set<int>& sentences,
                       const std::vector<PhraseSpan>& phrases, const TripletMap& triplets,
                       const fs::path& out_dir, const IoConfig& cfg) {
  for (int id : sentences)
    if (id < 1 || static_cast<std::size_t>(id) > doc.sentences.size())
      throw ValidationError("write_predictions: sentence id " + std::to_string(id) +
                            " out of range for doc '" + doc.doc_id + "'");
  for (const PhraseSpan& p : phrases) validate_phrase(doc, p, "write_predictions");
  for (const auto& [unit, list] : triplets)
    for (const Triplet& t : list)
      if (t.subject.empty() || t.predicate.empty() || t.object.empty())
        throw ValidationError("write_predictions: empty triplet field in unit '" +
                              unit_name(unit, cfg.unit_names) + "' of doc '" + doc.doc_id + "'");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw LoadError("cannot create " + out_dir.string() + ": " + ec.message());

  {
    std::ofstream os(out_dir / "contribution-sentences.txt");
    if (!os) throw LoadError("cannot write to " + out_dir.string());
    for (int id : sentences) os << id << "\n";  // std::set iterates ascending
  }
  {
    std::vector<PhraseSpan> sorted = phrases;
    std::sort(sorted.begin(), sorted.end());
    std::ofstream os(out_dir / "phrases.txt");
    for (const PhraseSpan& p : sorted)
      os << p.sentence_index << '\t' << p.start_char << '\t' << p.end_char << '\t' << p.text
         << "\n";
    if (!os) throw LoadError("cannot write to " + out_dir.string());
  }
  if (!triplets.empty()) {
    const fs::path triples_dir = out_dir / "triples";
    fs::create_directories(triples_dir, ec);
    if (ec) throw LoadError("cannot create " + triples_dir.string() + ": " + ec.message());
    for (const auto& [unit, list] : triplets) {
      std::ofstream os(triples_dir / (unit_name(unit, cfg.unit_names) + ".txt"));
      for (const Triplet& t : list)
        os << '(' << t.subject << cfg.triplet_separator << t.predicate << cfg.triplet_separator
           << t.object << ")\n";
      if (!os) throw LoadError("cannot write to " + triples_dir.string());
    }
  }
}

DocPredictions parse_predictions(const fs::path& doc_dir, const IoConfig& cfg) {
  DocPredictions pred;
  pred.doc_id = doc_dir.filename().string();
  const fs::path ids_file = doc_dir / "contribution-sentences.txt";
  if (fs::exists(ids_file)) {
    std::vector<int> ids = parse_sentence_ids(ids_file);
    pred.sentences.insert(ids.begin(), ids.end());
  }
  const fs::path phrase_file = doc_dir / "phrases.txt";
  if (fs::exists(phrase_file)) pred.phrases = parse_phrase_file(phrase_file);
  const fs::path triples_dir = doc_dir / "triples";
  if (fs::is_directory(triples_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(triples_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".txt")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
      auto unit = unit_from_name(file.stem().string(), cfg.unit_names);
      if (!unit)
        throw ValidationError("unknown info unit file in predictions: " + file.string());
      pred.triplets[*unit] = parse_triplet_file(file, *unit, cfg.triplet_separator);
    }
  }
  return pred;
}

}  // namespace ckg::corpus
