#include "csq/csv.hpp"

namespace csq {

std::optional<std::vector<std::string>> CsvReader::next() {
    int c = in_.peek();
    if (c == EOF) return std::nullopt;

    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    line_ = cursor_line_;

    while (true) {
        c = in_.get();
        if (quoted) {
            if (c == EOF) break;  // unterminated quote: take what we have
            if (c == '"') {
                if (in_.peek() == '"') {
                    field += '"';
                    in_.get();
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++cursor_line_;
                field += static_cast<char>(c);
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in_.peek() == '\n') in_.get();
            ++cursor_line_;
            break;
        } else if (c == '\n' || c == EOF) {
            if (c == '\n') ++cursor_line_;
            break;
        } else {
            field += static_cast<char>(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_quote(fields[i]);
    }
    return out;
}

}  // namespace csq
