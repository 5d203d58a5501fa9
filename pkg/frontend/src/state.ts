// UI state and pure rendering helpers.  Rendering is a pure function of the
// fetched records: same records in, same rows out, so the view layer can be
// snapshot-tested without a DOM.

import type { Credentials, WireRecord } from "./api.js";

export type Screen = "login" | "timeline" | "other_user";

export interface PostRow {
  recordID: string;
  when: string;
  text: string;
}

export interface UiState {
  screen: Screen;
  session: Credentials | null;
  posts: PostRow[];
  otherUsername: string | null;
  statusMessage: string | null;
}

export function initialState(): UiState {
  return {
    screen: "login",
    session: null,
    posts: [],
    otherUsername: null,
    statusMessage: null,
  };
}

export function formatWhen(wallMillis: number): string {
  return new Date(wallMillis).toISOString().replace("T", " ").slice(0, 19);
}

export function postRows(records: WireRecord[]): PostRow[] {
  return records.map((record) => ({
    recordID: record.recordID,
    when: formatWhen(record.stamp.wallMillis),
    text: record.fields["post"] ?? "",
  }));
}

export function composeEnabled(text: string): boolean {
  return text.trim().length > 0;
}
