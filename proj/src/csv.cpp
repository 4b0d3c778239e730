#include "comet/csv.hpp"

#include <istream>
#include <ostream>

namespace comet::csv {

bool read_row(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    int c = in.get();
    if (c == std::char_traits<char>::eof()) return false;

    std::string field;
    bool quoted = false;
    while (true) {
        if (c == std::char_traits<char>::eof()) {
            fields.push_back(field);
            return true;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                const int peek = in.peek();
                if (peek == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch == '\n') {
            fields.push_back(field);
            return true;
        } else if (ch == '\r') {
            // swallow CRLF
            if (in.peek() == '\n') in.get();
            fields.push_back(field);
            return true;
        } else {
            field.push_back(ch);
        }
        c = in.get();
    }
}

std::string escape(const std::string& field) {
    const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << escape(fields[i]);
    }
    out.put('\n');
}

} // namespace comet::csv
