// Drill-down table of sequence posts, already length-sorted by the server.

import type { PostRow } from "../api.js";

export function renderPosts(container: HTMLElement, rows: PostRow[],
                            heading: string): void {
  container.textContent = "";
  const title = document.createElement("h3");
  title.dataset.testid = "posts-heading";
  title.textContent = heading;
  container.append(title);
  if (!rows.length) {
    const empty = document.createElement("p");
    empty.dataset.testid = "posts-empty";
    empty.textContent = "No posts match the current filters.";
    container.append(empty);
    return;
  }
  const table = document.createElement("table");
  table.dataset.testid = "posts-table";
  const head = document.createElement("tr");
  for (const col of ["author", "role", "timestamp", "text"]) {
    const th = document.createElement("th");
    th.textContent = col;
    head.append(th);
  }
  table.append(head);
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.dataset.testid = `post-${row.post_id}`;
    for (const value of [row.player_id, row.role, row.timestamp, row.text]) {
      const td = document.createElement("td");
      td.textContent = value;
      tr.append(td);
    }
    table.append(tr);
  }
  container.append(table);
}
