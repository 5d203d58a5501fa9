// Screen logic, DOM-free so it can be driven by tests and by main.ts alike.
// One in-flight action at a time; every method resolves with the new state.

import { ApiError, FlareApi } from "./api.js";
import { initialState, postRows, UiState } from "./state.js";

export class FlutterApp {
  state: UiState = initialState();

  constructor(readonly api: FlareApi) {}

  /** Register the app on load; the session starts on the login screen. */
  async start(appName: string): Promise<void> {
    await this.api.registerApp(appName);
  }

  async login(username: string, password: string): Promise<UiState> {
    const result = await this.api.authenticate(username, password);
    if (!result.ok || !result.userID) {
      // Stay on the login screen; failure is an inline message.
      this.state = { ...this.state, statusMessage: "authentication failure" };
      return this.state;
    }
    this.state = {
      ...this.state,
      session: { userID: result.userID, password, username },
      screen: "timeline",
      statusMessage: null,
    };
    return this.refreshTimeline();
  }

  logout(): UiState {
    this.state = initialState();
    return this.state;
  }

  async refreshTimeline(): Promise<UiState> {
    if (!this.state.session) throw new Error("not logged in");
    const records = await this.api.ownTimeline(this.state.session);
    this.state = { ...this.state, screen: "timeline", posts: postRows(records) };
    return this.state;
  }

  async compose(text: string): Promise<UiState> {
    if (!this.state.session) throw new Error("not logged in");
    await this.api.putPost(this.state.session, text);
    return this.refreshTimeline();
  }

  async viewOther(username: string): Promise<UiState> {
    try {
      const records = await this.api.userPosts(username, this.state.session ?? undefined);
      this.state = {
        ...this.state,
        screen: "other_user",
        otherUsername: username,
        posts: postRows(records),
        statusMessage: null,
      };
    } catch (error) {
      if (error instanceof ApiError && error.code === "not_found") {
        this.state = { ...this.state, statusMessage: "user not found" };
      } else {
        throw error;
      }
    }
    return this.state;
  }
}
